"""Covering sums, the boundary-measure estimator, and measured partitions."""

import math

import numpy as np
import pytest

from gmtlab.domains import BoundaryCloud
from gmtlab.errors import EmptyCloudError, InvalidArgumentError, ResolutionError
from gmtlab.hausdorff import (
    CoverCell,
    Covering,
    build_partition,
    cover_sum,
    estimate_hm,
    estimate_hm_detail,
    partition_defect,
    partition_to_json,
    unit_ball_volume,
)

from conftest import circle_cloud, ellipse_cloud, segment_cloud


class TestUnitBallVolume:
    def test_dimension_zero(self):
        assert unit_ball_volume(0) == 1.0

    def test_low_dimensions_match_gamma_oracle(self):
        # oracle: pi^(d/2) / Gamma(d/2 + 1) evaluated independently
        for d, exact in [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3), (4, math.pi ** 2 / 2)]:
            oracle = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
            assert oracle == pytest.approx(exact, rel=1e-14)
            assert unit_ball_volume(d) == pytest.approx(oracle, rel=1e-14)

    def test_fractional_dimension_allowed(self):
        assert unit_ball_volume(1.5) == pytest.approx(
            math.pi ** 0.75 / math.gamma(1.75), rel=1e-14
        )

    def test_negative_rejected(self):
        with pytest.raises(InvalidArgumentError):
            unit_ball_volume(-0.1)


class TestCoverSum:
    def _cell(self, rd, members):
        return CoverCell(center=np.zeros(2), rd=rd, members=np.asarray(members))

    def test_two_unit_diameter_cells_d1(self):
        cov = Covering(1.0, [self._cell(0.5, [0]), self._cell(0.5, [1])], 2)
        assert cover_sum(cov) == pytest.approx(2.0)

    def test_d0_counts_cells(self):
        cov = Covering(0.0, [self._cell(0.7, [0])], 1)
        assert cover_sum(cov) == pytest.approx(1.0)
        cov0 = Covering(0.0, [self._cell(0.0, [0])], 1)
        assert cover_sum(cov0) == pytest.approx(1.0)  # 0^0 counts as 1

    def test_d2_single_cell(self):
        cov = Covering(2.0, [self._cell(1.0, [0])], 1)
        assert cover_sum(cov) == pytest.approx(math.pi)

    def test_empty_covering(self):
        cov = Covering(1.0, [], 0)
        assert cover_sum(cov) == 0.0

    def test_uncovered_point_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Covering(1.0, [self._cell(0.5, [0])], 2)

    def test_removing_redundant_cell_decreases_sum(self):
        cells = [self._cell(0.5, [0, 1]), self._cell(0.4, [1])]
        full = Covering(1.0, cells, 2)
        reduced = Covering(1.0, cells[:1], 2)  # still covers both points
        assert cover_sum(reduced) < cover_sum(full)


class TestEstimateHm:
    def test_unit_segment_length(self):
        cloud = segment_cloud(1.0, 1 / 512)
        assert estimate_hm(cloud, 1.0, 0.05) == pytest.approx(1.0, rel=0.03)

    def test_unit_circle_circumference(self):
        cloud = circle_cloud(1.0, 1 / 512)
        assert estimate_hm(cloud, 1.0, 0.05) == pytest.approx(2 * math.pi, rel=0.03)

    def test_single_point_cloud_is_zero(self):
        cloud = BoundaryCloud(dim=2, resolution=0.01, points=[[0.3, 0.4]], weights=[0.01])
        assert estimate_hm(cloud, 1.0, 1.0) == 0.0

    def test_non_increasing_in_delta(self):
        cloud = circle_cloud(1.0, 1 / 512)
        vals = [estimate_hm(cloud, 1.0, d) for d in (0.4, 0.2, 0.1, 0.05)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_reports_upper_bound_flag(self):
        est = estimate_hm_detail(circle_cloud(1.0, 1 / 128), 1.0, 0.1)
        assert est.upper_bound

    def test_delta_below_resolution_rejected(self):
        cloud = circle_cloud(1.0, 1 / 64)
        with pytest.raises(ResolutionError):
            estimate_hm(cloud, 1.0, 1 / 64)

    def test_empty_cloud_is_zero(self):
        cloud = BoundaryCloud(dim=2, resolution=0.01,
                              points=np.zeros((0, 2)), weights=np.zeros(0))
        assert estimate_hm(cloud, 1.0, 1.0) == 0.0


class TestBuildPartition:
    def test_structure_on_square_boundary(self):
        # synthetic square boundary: four segments
        pieces = []
        sp = 1 / 256
        n = 256
        x = (np.arange(n) + 0.5) * sp
        pieces.append(np.stack([x, np.zeros(n)], axis=1))
        pieces.append(np.stack([x, np.ones(n)], axis=1))
        pieces.append(np.stack([np.zeros(n), x], axis=1))
        pieces.append(np.stack([np.ones(n), x], axis=1))
        pts = np.concatenate(pieces)
        cloud = BoundaryCloud(dim=2, resolution=sp, points=pts,
                              weights=np.full(4 * n, sp))
        part = build_partition(cloud, 1.0, 0.25)
        # disjoint, union, nonempty are asserted in the constructor; check rd
        assert all(c.rd <= 0.125 + 2 * sp for c in part.cells)
        assert part.rd_max <= 0.25
        total_members = sum(len(c.member_indices) for c in part.cells)
        assert total_members == len(cloud)

    def test_straight_segment_zero_defect(self):
        cloud = segment_cloud(1.0, 1 / 512)
        part = build_partition(cloud, 1.0, 0.25)
        # straight pieces: compensated diameter equals the owned length
        assert partition_defect(part, 1.0) <= 2 * cloud.resolution * len(part)
        assert partition_defect(part, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_circle_defect_small_at_tenth(self):
        cloud = circle_cloud(1.0, 1 / 512)
        part = build_partition(cloud, 1.0, 0.1)
        assert partition_defect(part, 1.0) < 0.05 * 2 * math.pi

    def test_representative_is_member(self):
        cloud = circle_cloud(1.0, 1 / 128)
        part = build_partition(cloud, 1.0, 0.2)
        for cell in part.cells:
            assert cell.x_index in cell.member_indices
            assert any(np.allclose(cloud.points[m], cell.x_c) for m in [cell.x_index])

    def test_measure_preserved(self):
        cloud = ellipse_cloud(1.3, 0.7, 1 / 256)
        part = build_partition(cloud, 1.0, 0.2)
        total = sum(c.hm_est for c in part.cells)
        assert total == pytest.approx(cloud.total_weight, rel=1e-12)

    def test_empty_cloud_rejected(self):
        cloud = BoundaryCloud(dim=2, resolution=0.01,
                              points=np.zeros((0, 2)), weights=np.zeros(0))
        with pytest.raises(EmptyCloudError):
            build_partition(cloud, 1.0, 0.25)

    def test_coarse_delta_rejected(self):
        cloud = circle_cloud(1.0, 1 / 64)
        with pytest.raises(ResolutionError):
            build_partition(cloud, 1.0, 3 / 64)


class TestPartitionDefect:
    def test_circle_defect_shrinks_with_delta(self):
        cloud = circle_cloud(1.0, 1 / 512)
        d_coarse = partition_defect(build_partition(cloud, 1.0, 0.2), 1.0)
        d_fine = partition_defect(build_partition(cloud, 1.0, 0.05), 1.0)
        assert d_fine < d_coarse

    @pytest.mark.parametrize("cloud_fn", [circle_cloud, lambda: ellipse_cloud(1.3, 0.7, 1 / 512)])
    def test_defect_halving_rate(self, cloud_fn):
        cloud = cloud_fn()
        deltas = [0.4, 0.2, 0.1, 0.05]
        defects = [partition_defect(build_partition(cloud, 1.0, d), 1.0) for d in deltas]
        for coarse, fine in zip(defects, defects[1:]):
            assert fine <= 0.75 * coarse

    def test_single_cell_circle(self):
        # one cell holding the whole circle: measure 2 pi, diameter 2
        cloud = circle_cloud(1.0, 1 / 512)
        part = build_partition(cloud, 1.0, 8.0)
        assert len(part) == 1
        expected = abs(2 * math.pi - 2.0 * part.cells[0].rd)
        assert part.cells[0].rd == pytest.approx(1.0, rel=2e-3)
        assert partition_defect(part, 1.0) == pytest.approx(expected, rel=1e-12)
        assert partition_defect(part, 1.0) == pytest.approx(2 * math.pi - 2.0, rel=5e-3)


class TestPartitionExport:
    def test_json_fields(self):
        import json

        cloud = circle_cloud(1.0, 1 / 128)
        part = build_partition(cloud, 1.0, 0.2)
        data = json.loads(partition_to_json(part))
        assert data["n_cells"] == len(part)
        assert data["total_measure"] == pytest.approx(cloud.total_weight)
        cell = data["cells"][0]
        assert set(cell) == {"x_c", "rd", "hm_est", "members"}
