"""Suite specifications, suite execution, and report emission.

Suites are strict JSON: unknown keys anywhere in the file are rejected so a
misspelled tolerance or parameter can never silently change a verdict.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass, field

from . import __version__
from . import calculus as calc
from . import inequalities as ineq
from .domains import describe_spec, domain_from_spec, extract_boundary
from .errors import GmtLabError, SpecError

__all__ = ["SuiteSpec", "SuiteEntry", "RunManifest", "parse_suite", "run_suite", "emit"]

KNOWN_CHECKS = set(ineq.INEQUALITY_IDS) | {"swap_test"}

_ENTRY_KEYS = {"domain", "function", "checks", "modes", "parameters"}
_PARAM_KEYS = {"h", "eps", "s", "delta", "k_list", "c1", "domain_b", "eps_list", "iters", "step"}
_FUNCTION_KEYS = {"expr", "lipschitz"}
_SUITE_KEYS = {"name", "entries"}


@dataclass
class SuiteEntry:
    domain_spec: dict
    function_spec: dict | str
    checks: list
    modes: list
    parameters: dict

    @property
    def domain_label(self) -> str:
        return describe_spec(self.domain_spec)

    @property
    def function_label(self) -> str:
        if isinstance(self.function_spec, str):
            return self.function_spec
        return self.function_spec["expr"]


@dataclass
class SuiteSpec:
    name: str
    entries: list


@dataclass
class RunManifest:
    version: str
    timestamp: str
    input_hash: str
    suite_name: str
    entries: list  # {"index", "domain", "function", "error", "reports": [...]}
    passed: bool
    series: list = field(default_factory=list)  # (name, header, rows) for plot data

    def to_dict(self) -> dict:
        return {
            "tool": "gmtlab",
            "version": self.version,
            "timestamp": self.timestamp,
            "input_hash": self.input_hash,
            "suite": self.suite_name,
            "pass": self.passed,
            "entries": self.entries,
        }


def _validate_function_spec(fn) -> dict | str:
    if fn == "indicator":
        return fn
    if not isinstance(fn, dict):
        raise SpecError("function must be 'indicator' or an object with 'expr'")
    unknown = set(fn) - _FUNCTION_KEYS
    if unknown:
        raise SpecError(f"unknown function spec keys: {sorted(unknown)}")
    if "expr" not in fn:
        raise SpecError("function spec is missing 'expr'")
    return fn


def parse_suite_dict(data: dict) -> SuiteSpec:
    if not isinstance(data, dict):
        raise SpecError("suite must be a JSON object")
    unknown = set(data) - _SUITE_KEYS
    if unknown:
        raise SpecError(f"unknown suite keys: {sorted(unknown)}")
    name = data.get("name")
    if not isinstance(name, str):
        raise SpecError("suite needs a string 'name'")
    raw_entries = data.get("entries")
    if not isinstance(raw_entries, list):
        raise SpecError("suite needs an 'entries' list")
    entries = []
    for pos, raw in enumerate(raw_entries):
        if not isinstance(raw, dict):
            raise SpecError(f"entry {pos} must be an object")
        unknown = set(raw) - _ENTRY_KEYS
        if unknown:
            raise SpecError(f"entry {pos}: unknown keys {sorted(unknown)}")
        for key in ("domain", "function", "checks"):
            if key not in raw:
                raise SpecError(f"entry {pos} is missing '{key}'")
        checks = raw["checks"]
        if not isinstance(checks, list) or not checks:
            raise SpecError(f"entry {pos}: 'checks' must be a nonempty list")
        for cid in checks:
            if cid not in KNOWN_CHECKS:
                raise SpecError(f"entry {pos}: unknown inequality id '{cid}'")
        modes = raw.get("modes", ["optimal", "paper_factor"])
        for mode in modes:
            if mode not in ("optimal", "paper_factor"):
                raise SpecError(f"entry {pos}: unknown mode '{mode}'")
        parameters = raw.get("parameters", {})
        if not isinstance(parameters, dict):
            raise SpecError(f"entry {pos}: 'parameters' must be an object")
        unknown = set(parameters) - _PARAM_KEYS
        if unknown:
            raise SpecError(f"entry {pos}: unknown parameters {sorted(unknown)}")
        # validate domain spec eagerly for parse-time diagnostics
        if not isinstance(raw["domain"], dict):
            raise SpecError(f"entry {pos}: 'domain' must be an object")
        entries.append(
            SuiteEntry(
                domain_spec=raw["domain"],
                function_spec=_validate_function_spec(raw["function"]),
                checks=list(checks),
                modes=list(modes),
                parameters=dict(parameters),
            )
        )
    return SuiteSpec(name=name, entries=entries)


def parse_suite(path) -> SuiteSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise SpecError(f"suite file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}"
        ) from exc
    return parse_suite_dict(data)


def suite_to_dict(spec: SuiteSpec) -> dict:
    return {
        "name": spec.name,
        "entries": [
            {
                "domain": e.domain_spec,
                "function": e.function_spec,
                "checks": e.checks,
                "modes": e.modes,
                "parameters": e.parameters,
            }
            for e in spec.entries
        ],
    }


def _build_function(entry: SuiteEntry, domain, cloud):
    if entry.function_spec == "indicator":
        return calc.indicator_function(domain, cloud)
    lips = entry.function_spec.get("lipschitz")
    return calc.from_expression(domain, entry.function_spec["expr"], cloud,
                                lipschitz=None if lips is None else float(lips))


def _run_entry(entry: SuiteEntry, h_override, tol_override) -> list:
    params = entry.parameters
    h = h_override if h_override is not None else params.get("h")
    domain = domain_from_spec(entry.domain_spec, h_override=h)
    cloud = extract_boundary(domain)
    u = _build_function(entry, domain, cloud)
    reports = []
    for cid in entry.checks:
        if cid == "mazya":
            for mode in entry.modes:
                reports.append(ineq.check_mazya(domain, u, mode=mode, tol=tol_override))
        elif cid == "mazya_l2":
            reports.append(
                ineq.check_mazya_l2(domain, u, params.get("c1", "auto"), tol=tol_override)
            )
        elif cid == "isoperimetric":
            reports.append(ineq.check_isoperimetric(domain, tol=tol_override))
        elif cid == "sobolev":
            reports.append(ineq.check_sobolev(u, tol=tol_override))
        elif cid == "sobolev_extended":
            reports.append(
                ineq.check_extended_sobolev(u, params.get("k_list", (4, 8, 16)), tol=tol_override)
            )
        elif cid == "bv_bound":
            reports.append(ineq.check_bv_bound(domain, u, tol=tol_override))
        elif cid == "brunn_minkowski":
            spec_b = params.get("domain_b", entry.domain_spec)
            domain_b = domain_from_spec(spec_b, h_override=h)
            reports.append(ineq.check_brunn_minkowski(domain, domain_b, tol=tol_override))
        elif cid == "perimeter_iso":
            reports.append(
                ineq.check_perimeter_iso(domain, params.get("eps_list"), tol=tol_override)
            )
        elif cid == "swap_test":
            # deliberately violated fixture: the isoperimetric sides swapped
            base = ineq.check_isoperimetric(domain, tol=tol_override)
            swapped = ineq.Report(
                "isoperimetric", base.rhs, base.lhs, base.constant_mode,
                base.constant_value, base.tol, metadata={"swap_test": True, "h": domain.spacing},
            )
            swapped.inequality_id = "swap_test"
            reports.append(swapped)
    for rep in reports:
        rep.metadata.setdefault("h", domain.spacing)
        rep.metadata["domain"] = entry.domain_label
        rep.metadata["function"] = entry.function_label
    return reports


def run_suite(
    spec: SuiteSpec,
    h_override: float | None = None,
    tol_override: float | None = None,
    input_hash: str = "",
) -> RunManifest:
    """Execute all entries sequentially and collect reports.

    Per-entry errors are recorded without aborting the suite; the manifest
    passes only when every report holds and no entry errored.
    """
    entries_out = []
    all_hold = True
    for idx, entry in enumerate(spec.entries):
        record = {
            "index": idx,
            "domain": entry.domain_label,
            "function": entry.function_label,
            "error": None,
            "reports": [],
        }
        try:
            reports = _run_entry(entry, h_override, tol_override)
            record["reports"] = [r.to_dict() for r in reports]
            if not all(r.holds for r in reports):
                all_hold = False
        except (GmtLabError, ValueError) as exc:
            record["error"] = f"{type(exc).__name__}: {exc}"
            all_hold = False
        entries_out.append(record)
    timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return RunManifest(
        version=__version__,
        timestamp=timestamp,
        input_hash=input_hash,
        suite_name=spec.name,
        entries=entries_out,
        passed=all_hold,
    )


def hash_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# emission

CSV_HEADER = "inequality_id,domain,function,h,lhs,rhs,ratio,holds"


def _csv_body(manifest: RunManifest) -> list:
    rows = [CSV_HEADER]
    for entry in manifest.entries:
        for rep in entry["reports"]:
            rows.append(
                ",".join(
                    [
                        rep["inequality_id"],
                        '"' + entry["domain"] + '"',
                        '"' + entry["function"] + '"',
                        repr(rep["metadata"].get("h", "")),
                        repr(rep["lhs"]),
                        repr(rep["rhs"]),
                        repr(rep["ratio"]),
                        str(bool(rep["holds"])).lower(),
                    ]
                )
            )
        if entry["error"]:
            rows.append(f'error,"{entry["domain"]}","{entry["function"]}",,,,,error')
    return rows


def emit(manifest: RunManifest, fmt: str, path) -> None:
    """Write a manifest as json, csv, or tsv-plots.

    Output bytes depend only on the manifest content; the timestamp is
    confined to one header line (csv) or one top-level field (json).
    """
    path = str(path)
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest.to_dict(), fh, indent=2)
            fh.write("\n")
        return
    if fmt == "csv":
        lines = [f"# gmtlab {manifest.version} run {manifest.timestamp}"]
        lines.extend(_csv_body(manifest))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        return
    if fmt == "tsv-plots":
        if not manifest.series:
            raise SpecError("manifest carries no plot series")
        stem = path[: -len(".tsv")] if path.endswith(".tsv") else path
        for name, header, rows in manifest.series:
            out = [f"# series {name}", "\t".join(header)]
            out.extend("\t".join(repr(v) for v in row) for row in rows)
            with open(f"{stem}_{name}.tsv", "w", encoding="utf-8") as fh:
                fh.write("\n".join(out) + "\n")
        return
    raise SpecError(f"unknown emission format '{fmt}'")
