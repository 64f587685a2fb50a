"""Text serialization: filters, signals, matrices, spectra, result tables.

Two formatting regimes coexist on purpose. Data files that feed back into
computations (signals, matrices, filters) store floats via repr, which
round-trips exactly. Derived result tables and console output use 12
significant digits, enough to compare runs across platforms without
claiming bit-exactness.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import anm, decomp, experiments
from .errors import ConfigError, DataFormatError
from .gfilter import GFilter, PoleSpec
from .signals import RNG_ALGORITHM

FILTER_FORMAT = "linespec-filter"
SPECTRUM_FORMAT = "linespec-spectrum"


def fmt12(x) -> str:
    """12 significant digits, the convention for human-facing numbers."""
    return f"{float(x):.12g}"


def _reprf(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------

def save_filter(path, f: GFilter, epsilon: float | None = None) -> None:
    doc = {
        "format": FILTER_FORMAT,
        "version": 1,
        "n": f.n,
        "epsilon": epsilon,
        "poles": [
            {"modulus": p.modulus, "phase": p.phase, "multiplicity": p.multiplicity}
            for p in f.poles
        ],
        "A_real": f.A.real.tolist(),
        "A_imag": f.A.imag.tolist(),
        "b_real": f.b.real.tolist(),
        "b_imag": f.b.imag.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_filter(path) -> tuple[GFilter, float | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read filter file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FILTER_FORMAT:
        raise DataFormatError(f"{path} is not a filter file")
    allowed = {"format", "version", "n", "epsilon", "poles",
               "A_real", "A_imag", "b_real", "b_imag"}
    unknown = set(doc) - allowed
    if unknown:
        raise DataFormatError(f"unknown keys in filter file: {sorted(unknown)}")
    try:
        A = np.array(doc["A_real"], dtype=float) + 1j * np.array(doc["A_imag"], dtype=float)
        b = np.array(doc["b_real"], dtype=float) + 1j * np.array(doc["b_imag"], dtype=float)
        poles = tuple(
            PoleSpec(p["modulus"], p["phase"], p["multiplicity"]) for p in doc["poles"]
        )
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed filter file {path}: {exc}") from exc
    if A.shape != (n, n) or b.shape != (n,):
        raise DataFormatError(f"filter arrays inconsistent with n={n}")
    f = GFilter(A=A, b=b, poles=poles)
    residual = np.linalg.norm(A @ A.conj().T + np.outer(b, b.conj()) - np.eye(n))
    if residual > 1e-9:
        raise DataFormatError(
            f"filter in {path} violates the normalization condition "
            f"(residual {residual:.3e}); re-run the design step"
        )
    eps = doc.get("epsilon")
    return f, (float(eps) if eps is not None else None)


# ---------------------------------------------------------------------------
# Signals and complex matrices
# ---------------------------------------------------------------------------

def save_signal(path, y) -> None:
    y = np.asarray(y, dtype=complex).reshape(-1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for v in y:
            w.writerow([_reprf(v.real), _reprf(v.imag)])


def load_signal(path) -> np.ndarray:
    rows = _read_csv(path, expected_header=["re", "im"])
    try:
        return np.array([complex(float(r), float(i)) for r, i in rows])
    except ValueError as exc:
        raise DataFormatError(f"bad numeric value in {path}: {exc}") from exc


def save_matrix(path, M) -> None:
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    cols = M.shape[1]
    header = []
    for c in range(cols):
        header += [f"re_c{c}", f"im_c{c}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in M:
            flat = []
            for v in row:
                flat += [_reprf(v.real), _reprf(v.imag)]
            w.writerow(flat)


def load_matrix(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path} is empty") from None
        rows = list(reader)
    if len(header) % 2 != 0 or not header or header[0] != "re_c0":
        raise DataFormatError(f"{path} does not look like a complex matrix table")
    cols = len(header) // 2
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise DataFormatError(f"bad numeric value in {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2 * cols:
        raise DataFormatError(f"ragged rows in {path}")
    return data[:, 0::2] + 1j * data[:, 1::2]


def _read_csv(path, expected_header=None):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataFormatError(f"{path} is empty") from None
            rows = list(reader)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if expected_header is not None and header != expected_header:
        raise DataFormatError(
            f"{path}: expected header {expected_header}, found {header}"
        )
    return rows


# ---------------------------------------------------------------------------
# Profiles (gain, null function) and spectra
# ---------------------------------------------------------------------------

def save_profile(path, thetas, values, value_column: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", value_column])
        for t, v in zip(thetas, values):
            w.writerow([_reprf(t), _reprf(v)])


def save_spectrum(path, spectrum: decomp.LineSpectrum, diagnostics: dict | None = None) -> None:
    lines = []
    for k in range(spectrum.count):
        entry = {"theta": float(spectrum.frequencies[k])}
        entry["power"] = (
            float(spectrum.powers[k]) if spectrum.powers is not None else None
        )
        lines.append(entry)
    doc = {
        "format": SPECTRUM_FORMAT,
        "version": 1,
        "count": spectrum.count,
        "lines": lines,
        "under_resolved": spectrum.under_resolved,
        "powers_clamped": spectrum.powers_clamped,
    }
    if diagnostics:
        doc["diagnostics"] = diagnostics
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_spectrum(path) -> decomp.LineSpectrum:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read spectrum file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != SPECTRUM_FORMAT:
        raise DataFormatError(f"{path} is not a spectrum file")
    freqs = np.array([ln["theta"] for ln in doc["lines"]], dtype=float)
    raw_powers = [ln.get("power") for ln in doc["lines"]]
    powers = None
    if all(p is not None for p in raw_powers) and raw_powers:
        powers = np.array(raw_powers, dtype=float)
    elif not raw_powers:
        powers = np.empty(0)
    return decomp.LineSpectrum(
        count=int(doc["count"]),
        frequencies=freqs,
        powers=powers,
        under_resolved=bool(doc.get("under_resolved", False)),
        powers_clamped=bool(doc.get("powers_clamped", False)),
    )


# ---------------------------------------------------------------------------
# Experiment configs
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {
    "L", "m", "layout", "theta0_grid", "snr_db_grid", "trials", "base_seed",
    "amplitude_modulus", "epsilon", "lambda_policy", "rank_rule", "solver",
}
_TOP_KEYS = _SCENARIO_KEYS | {"name", "methods"}
_METHOD_KEYS = {"method", "filter_poles"}
_POLICY_KEYS = {"kind", "value", "sqrt_term_uses_outputs"}
_RULE_KEYS = {"abs_threshold", "ratio_threshold"}
_SOLVER_KEYS = {"tol", "max_iterations", "rho", "check_every"}


def _check_keys(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_poles(raw) -> tuple[PoleSpec, ...]:
    poles = []
    for item in raw:
        if isinstance(item, dict):
            _check_keys(item, {"modulus", "phase", "multiplicity"}, "pole")
            poles.append(PoleSpec(item["modulus"], item["phase"],
                                  int(item.get("multiplicity", 1))))
        else:
            mod, phase, mult = item
            poles.append(PoleSpec(mod, phase, int(mult)))
    return tuple(poles)


def parse_experiment_config(doc: dict) -> tuple[str, list[experiments.ScenarioConfig]]:
    """Experiment file: shared scenario fields plus one block per method."""
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "experiment config")
    if "methods" not in doc or not doc["methods"]:
        raise ConfigError("experiment config needs a nonempty 'methods' list")
    name = doc.get("name", "experiment")

    policy_doc = doc.get("lambda_policy", {"kind": "heuristic"})
    _check_keys(policy_doc, _POLICY_KEYS, "lambda_policy")
    policy = experiments.LambdaPolicy(
        kind=policy_doc.get("kind", "heuristic"),
        value=policy_doc.get("value"),
        sqrt_term_uses_outputs=bool(policy_doc.get("sqrt_term_uses_outputs", False)),
    )
    rule_doc = doc.get("rank_rule", {})
    _check_keys(rule_doc, _RULE_KEYS, "rank_rule")
    rule = decomp.RankRule(
        abs_threshold=float(rule_doc.get("abs_threshold", 1e-3)),
        ratio_threshold=float(rule_doc.get("ratio_threshold", 1e3)),
    )
    solver_doc = doc.get("solver", {})
    _check_keys(solver_doc, _SOLVER_KEYS, "solver")
    solver = anm.SolverOptions(
        tol=float(solver_doc.get("tol", 1e-6)),
        max_iterations=int(solver_doc.get("max_iterations", 50_000)),
        rho=float(solver_doc.get("rho", 1.0)),
        check_every=int(solver_doc.get("check_every", 10)),
    )

    configs = []
    for block in doc["methods"]:
        _check_keys(block, _METHOD_KEYS, "method block")
        configs.append(experiments.ScenarioConfig(
            method=block["method"],
            L=int(doc["L"]),
            m=int(doc["m"]),
            layout=doc["layout"],
            theta0_grid=tuple(doc["theta0_grid"]),
            snr_db_grid=tuple(doc["snr_db_grid"]),
            trials=int(doc["trials"]),
            base_seed=int(doc.get("base_seed", 0)),
            amplitude_modulus=float(doc.get("amplitude_modulus", 1.0)),
            epsilon=float(doc.get("epsilon", 1e-3)),
            filter_poles=_parse_poles(block.get("filter_poles", [])),
            lambda_policy=policy,
            rank_rule=rule,
            solver=solver,
        ))
    return name, configs


def load_experiment_config(path) -> tuple[str, list[experiments.ScenarioConfig]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read experiment config {path}: {exc}") from exc
    return parse_experiment_config(doc)


# ---------------------------------------------------------------------------
# Result tables
# ---------------------------------------------------------------------------

RECOVERY_COLUMNS = ["method", "theta0", "snr_db", "trials", "successes", "p_succ"]
ERROR_COLUMNS = ["method", "theta0", "snr_db", "trial_index", "freq_error"]


def write_recovery_table(path, results: list[experiments.ScenarioResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RECOVERY_COLUMNS)
        for res in results:
            for cell in res.cells:
                w.writerow([
                    res.config.method, fmt12(cell.theta0), fmt12(cell.snr_db),
                    cell.trials, cell.successes, fmt12(cell.p_succ),
                ])


def write_error_table(path, results: list[experiments.ScenarioResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ERROR_COLUMNS)
        for res in results:
            for rec in res.records:
                if rec.success and rec.freq_error is not None:
                    w.writerow([
                        res.config.method, fmt12(rec.theta0), fmt12(rec.snr_db),
                        rec.trial_index, fmt12(rec.freq_error),
                    ])


def write_comparison_table(path, results: list[experiments.ScenarioResult]) -> None:
    """Recovery summary of several methods keyed by method name."""
    write_recovery_table(path, results)


def write_meta(path, configs: list[experiments.ScenarioConfig], name: str,
               extra: dict | None = None) -> None:
    doc = {
        "name": name,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "rng_algorithm": RNG_ALGORITHM,
        "scenarios": [_config_dict(c) for c in configs],
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _config_dict(cfg: experiments.ScenarioConfig) -> dict:
    d = asdict(cfg)
    d["filter_poles"] = [
        {"modulus": p.modulus, "phase": p.phase, "multiplicity": p.multiplicity}
        for p in cfg.filter_poles
    ]
    d["solver"] = {k: v for k, v in asdict(cfg.solver).items() if k != "initial"}
    return d


def load_table(path) -> tuple[list[str], list[dict]]:
    """Generic delimited-table reader: header list plus row dicts."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path} is empty")
        return list(reader.fieldnames), list(reader)
