"""Command-line front end.

    python3 -m akenmotsu validate --config model.json
    python3 -m akenmotsu analyze  --config model.json --out report.json --csv planes.csv
    python3 -m akenmotsu deform   --config model.json --beta 2 [--d-conformal]
    python3 -m akenmotsu compare  --config pair.json
    python3 -m akenmotsu selftest [--seed 7] [--tol-scale 0.01]

Exit codes: 0 all checks pass, 1 usage or config error, 2 a check failed,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path


from . import __version__
from .acm_structure import (
    AcmStructure,
    check_alpha_kenmotsu,
    check_cr_integrable,
    check_eta_parallel_h,
    h_prime,
    validate,
)
from .canonical_connection import check_nabla_T_and_R, check_parallelism
from .deformation import (
    InvalidBeta,
    NotKmuModel,
    d_conformal_change,
    deform,
    transform_kmu,
    verify_curvature_relation,
    verify_lc_relation,
)
from .model_catalog import InvalidParams, LieGroupModelParams, build_model
from .nullity_analysis import (
    PreconditionFailed,
    classify_pair,
    fit_kappa_nullity,
    fit_kmu,
    invariant,
    leaf_curvatures,
    verify_kmu_curvature_formula,
)
from .reports import CheckReport, to_jsonable
from .selftest import CRITERIA, run_selftest
from .tensor_core import (
    DEFAULT_TOLERANCES,
    Tolerances,
    max_abs,
    nabla,
    sectional_curvature_value,
    to_frame,
)

log = logging.getLogger("akenmotsu")

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_INTERNAL = 0, 1, 2, 3
MIN_SAMPLES = 4


class ConfigParseError(ValueError):
    pass


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class ModelSpec:
    params: LieGroupModelParams
    deform_beta: float | None = None

    def build(self) -> AcmStructure:
        S = build_model(self.params)
        return deform(S, self.deform_beta) if self.deform_beta is not None else S

    def to_dict(self) -> dict:
        out = self.params.to_dict()
        if self.deform_beta is not None:
            out["deform"] = self.deform_beta
        return out


@dataclass
class RunConfig:
    models: list
    sample_count: int = 20
    seed: int = 42
    tolerances: Tolerances = field(default_factory=lambda: DEFAULT_TOLERANCES)
    output_path: str | None = None
    csv_path: str | None = None
    beta: float | None = None
    d_conformal: bool = False
    tol_scale: float = 1.0

    def echo(self) -> dict:
        return {
            "models": [m.to_dict() for m in self.models],
            "sample_count": self.sample_count,
            "seed": self.seed,
            "tolerances": self.tolerances.as_dict(),
            "beta": self.beta,
            "d_conformal": self.d_conformal,
            "tol_scale": self.tol_scale,
        }


_MODEL_KEYS = {"n", "alpha", "lambdas", "deform"}
_TOP_KEYS = {
    "model", "models", "sample_count", "seed", "tolerances", "output_path",
    "csv_path", "beta", "d_conformal", "tol_scale",
} | _MODEL_KEYS


def _parse_model(d) -> ModelSpec:
    if not isinstance(d, dict):
        raise ConfigParseError(f"model entry must be an object, got {d!r}")
    unknown = set(d) - _MODEL_KEYS
    if unknown:
        raise ConfigParseError(f"unknown model keys {sorted(unknown)}")
    if "alpha" not in d or "lambdas" not in d:
        raise ConfigParseError("model needs 'alpha' and 'lambdas'")
    try:
        params = LieGroupModelParams.from_dict(d)
    except (InvalidParams, TypeError, ValueError) as exc:
        raise ConfigParseError(f"invalid model parameters: {exc}") from exc
    beta = d.get("deform")
    if beta is not None:
        beta = _positive(beta, "deform")
    return ModelSpec(params, beta)


def _positive(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"{name} must be a number") from exc
    if not (math.isfinite(v) and v > 0):
        raise ConfigParseError(f"{name} must be positive, got {value!r}")
    return v


def parse_config(d: dict, require_models: int = 0) -> RunConfig:
    """Build a :class:`RunConfig` from a decoded JSON object."""
    if not isinstance(d, dict):
        raise ConfigParseError("config must be a JSON object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigParseError(f"unknown config keys {sorted(unknown)}")
    if "models" in d:
        if not isinstance(d["models"], list):
            raise ConfigParseError("'models' must be a list")
        models = [_parse_model(m) for m in d["models"]]
    elif "model" in d:
        models = [_parse_model(d["model"])]
    elif "alpha" in d:
        models = [_parse_model({k: d[k] for k in _MODEL_KEYS if k in d})]
    else:
        models = []
    if len(models) < require_models:
        raise ConfigParseError(f"expected {require_models} model(s), found {len(models)}")

    count = d.get("sample_count", 20)
    if not isinstance(count, int) or isinstance(count, bool) or count < MIN_SAMPLES:
        raise ConfigParseError(f"sample_count must be an integer >= {MIN_SAMPLES}, got {count!r}")
    seed = d.get("seed", 42)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigParseError(f"seed must be an integer, got {seed!r}")

    overrides = d.get("tolerances", {}) or {}
    if not isinstance(overrides, dict):
        raise ConfigParseError("'tolerances' must be an object")
    unknown = set(overrides) - set(DEFAULT_TOLERANCES.as_dict())
    if unknown:
        raise ConfigParseError(f"unknown tolerance names {sorted(unknown)}")
    tol = DEFAULT_TOLERANCES.override(
        **{k: _positive(v, f"tolerances.{k}") for k, v in overrides.items()}
    )
    beta = d.get("beta")
    return RunConfig(
        models=models,
        sample_count=count,
        seed=seed,
        tolerances=tol,
        output_path=d.get("output_path"),
        csv_path=d.get("csv_path"),
        beta=_positive(beta, "beta") if beta is not None else None,
        d_conformal=bool(d.get("d_conformal", False)),
        tol_scale=_positive(d.get("tol_scale", 1.0), "tol_scale"),
    )


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"config {path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# JSON output with 17 significant digits
# ---------------------------------------------------------------------------


def _format_float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    text = format(v, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class Report:
    command: str
    config: dict
    sections: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    def add(self, report: CheckReport) -> CheckReport:
        self.sections[report.title] = report
        return report

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.sections.values())

    def stable(self) -> dict:
        """Everything except timing; byte-stable for a fixed config."""
        return to_jsonable(
            {
                "command": self.command,
                "version": __version__,
                "config": self.config,
                "passed": self.passed,
                "checks": {k: v.to_dict() for k, v in self.sections.items()},
                "derived": self.derived,
                "notes": self.notes,
            }
        )

    def to_dict(self) -> dict:
        return {"stable": self.stable(), "timing": {"wall_seconds": self.seconds}}

    def summary_lines(self) -> list:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for title, rep in self.sections.items():
            if self.command == "selftest":
                failed = sum(not c.passed for c in rep.checks)
                state = "PASS" if not failed else f"FAIL ({failed} failed)"
                lines.append(f"  {title}: {state} over {len(rep.checks)} rows")
            for c in rep.checks:
                if self.command == "selftest" and c.passed:
                    continue
                mark = "ok  " if c.passed else "FAIL"
                rel = ">" if c.above else "<"
                lines.append(f"  [{mark}] {title}.{c.name}: {c.residual:.3e} {rel} {c.threshold:.1e}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return lines


def _samples(S: AcmStructure, cfg: RunConfig) -> list:
    return S.chart.sample(cfg.sample_count, cfg.seed)


def _validate_sections(rep: Report, S: AcmStructure, samples, tol: Tolerances) -> None:
    rep.add(validate(S, samples, tol))
    ak = rep.add(check_alpha_kenmotsu(S, samples, tol))
    rep.derived["alpha"] = S.alpha
    rep.derived["alpha_fit"] = ak.data["alpha_fit"]
    rep.add(check_cr_integrable(S, samples, tol))
    rep.add(check_eta_parallel_h(S, samples, tol))
    rep.notes.extend(S.notes)


def _nullity_summary(S: AcmStructure, samples) -> dict:
    fit = fit_kmu(S, samples)
    out = {"fit": fit.to_dict()}
    if fit.is_kmu and not fit.h_vanishes:
        out["invariant"] = invariant(S, samples, fit).to_dict()
    return out


def cmd_validate(cfg: RunConfig) -> Report:
    spec = cfg.models[0]
    S = spec.build()
    rep = Report("validate", cfg.echo())
    _validate_sections(rep, S, _samples(S, cfg), cfg.tolerances)
    return rep


def _plane_rows(S: AcmStructure, samples) -> list:
    rows = []
    for idx, p in enumerate(samples):
        x = p.coords
        E = S.frame(x)
        R, g = S.riemann(x), S.g(x)
        for a in range(S.dim):
            for b in range(a + 1, S.dim):
                K = sectional_curvature_value(R, g, E[:, a], E[:, b])
                rows.append((idx, float(x[0]), a, b, K))
    return rows


def write_planes_csv(path: str, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "t", "frame_a", "frame_b", "K"])
        for r in rows:
            w.writerow([r[0], _format_float(r[1]), r[2], r[3], _format_float(r[4])])


def cmd_analyze(cfg: RunConfig) -> Report:
    S = cfg.models[0].build()
    samples = _samples(S, cfg)
    tol = cfg.tolerances
    rep = Report("analyze", cfg.echo())
    _validate_sections(rep, S, samples, tol)

    hp = h_prime(S, samples[0], samples)
    rep.derived["h_prime"] = hp.to_dict()
    rep.derived["nullity"] = _nullity_summary(S, samples)
    rep.add(check_parallelism(S, samples, tol))
    tr = rep.add(check_nabla_T_and_R(S, samples, tol))
    rep.derived["canonical"] = dict(tr.data)

    worst = 0.0
    for p in samples:
        x = p.coords
        nR = nabla(S.riemann(x), S.riemann.d(x), S.gamma(x), "uddd")
        worst = max(worst, max_abs(to_frame(nR, S.frame(x), "duddd")))
    rep.derived["local_symmetry"] = {
        "nabla_R_max": worst,
        "locally_symmetric": worst < tol.nabla_r,
    }
    fit = rep.derived["nullity"]["fit"]
    if fit["is_kmu"] and not fit["h_vanishes"]:
        rep.add(verify_kmu_curvature_formula(S, samples, tol))
    if max(abs(v) for v in hp.eigenvalues) > 1e-6:
        rep.derived["leaf_curvatures"] = leaf_curvatures(S, samples[0].coords)
    if cfg.csv_path:
        write_planes_csv(cfg.csv_path, _plane_rows(S, samples))
    return rep


def _state(S: AcmStructure, samples, tol) -> dict:
    out = {"alpha": S.alpha, "alpha_fit": check_alpha_kenmotsu(S, samples, tol).data["alpha_fit"]}
    fit = fit_kmu(S, samples)
    out.update({"kappa": fit.kappa, "mu": fit.mu, "is_kmu": fit.is_kmu})
    out["I"] = fit.kappa / S.alpha**2 if fit.is_kmu and not fit.h_vanishes else None
    return out


def cmd_deform(cfg: RunConfig) -> Report:
    beta = cfg.beta
    if beta is None:
        raise ConfigParseError("deform needs beta (config 'beta' or --beta)")
    S = cfg.models[0].build()
    samples = _samples(S, cfg)
    tol = cfg.tolerances
    rep = Report("deform", cfg.echo())
    Sb = deform(S, beta)
    vd = validate(Sb, samples, tol)
    vd.title = "validate_deformed"
    rep.add(vd)
    rep.add(verify_lc_relation(S, beta, samples, tol))
    rep.add(verify_curvature_relation(S, beta, samples, tol))

    before, after = _state(S, samples, tol), _state(Sb, samples, tol)
    rep.derived["before"], rep.derived["after"] = before, after
    inv = CheckReport("deformation_invariants")
    thr = 100 * S.curv_tol(tol)
    inv.add("alpha_over_beta", abs(after["alpha_fit"] - S.alpha / beta), tol.deriv)
    if before["is_kmu"] and before["mu"] is not None:
        kb, mb = transform_kmu(before["kappa"], before["mu"], beta)
        inv.add("kappa_bar", abs(after["kappa"] - kb), 1e-4)
        inv.add("mu_bar", abs(after["mu"] - mb), 1e-4)
        inv.add("I_invariance", abs(after["I"] - before["I"]), 1e-8)
    worst = 0.0
    for p in samples:
        x = p.coords
        dG = Sb.canonical_gamma(x) - S.canonical_gamma(x)
        worst = max(worst, max_abs(to_frame(dG, S.frame(x), "udd")))
    inv.add("canonical_connection_invariance", worst, thr)
    rep.add(inv)
    rep.notes.extend(Sb.notes)

    if cfg.d_conformal:
        C = d_conformal_change(S)
        ak = check_alpha_kenmotsu(C, samples, tol)
        fc = fit_kappa_nullity(C, samples)
        dc = CheckReport("d_conformal")
        dc.add("d_eta", ak.residual("d_eta"), tol.deriv)
        dc.add("d_Phi_prime", ak.data["d_Phi_max"], tol.deriv)
        dc.add("kappa_c_nullity", fc.residual, fc.threshold)
        kappa = before["kappa"]
        dc.add("kappa_c_relation", abs(fc.kappa - (kappa + S.alpha**2)), 1e-4)
        rep.add(dc)
        rep.derived["d_conformal"] = {
            "kappa_c": fc.kappa,
            "kappa_plus_alpha_sq": kappa + S.alpha**2,
            "kind": ak.data["kind"],
        }
    return rep


def cmd_compare(cfg: RunConfig) -> Report:
    if len(cfg.models) != 2:
        raise ConfigParseError("compare needs exactly two models under 'models'")
    S1, S2 = (m.build() for m in cfg.models)
    rep = Report("compare", cfg.echo())
    verdict = classify_pair(S1, S2, _samples(S1, cfg), _samples(S2, cfg), cfg.tolerances)
    rep.derived["verdict"] = verdict.to_dict()
    rep.notes.extend(S1.notes + S2.notes)
    return rep


def cmd_selftest(cfg: RunConfig) -> Report:
    res = run_selftest(cfg.sample_count, cfg.seed, cfg.tol_scale)
    rep = Report("selftest", {"sample_count": cfg.sample_count, "seed": cfg.seed,
                              "tol_scale": cfg.tol_scale})
    for k, label in CRITERIA.items():
        cr = CheckReport(f"{k:02d}-{label}")
        for row in res.rows:
            if row.criterion == k:
                c = row.check
                cr.add(f"{row.model} :: {c.name}", c.residual, c.threshold, c.note, c.above)
        rep.add(cr)
    rep.derived["matrix"] = {str(k): v for k, v in res.matrix().items()}
    return rep


COMMANDS = {
    "validate": (cmd_validate, 1),
    "analyze": (cmd_analyze, 1),
    "deform": (cmd_deform, 1),
    "compare": (cmd_compare, 2),
    "selftest": (cmd_selftest, 0),
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="akenmotsu", description="Verify almost alpha-Kenmotsu structures.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int, help="number of sample points")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--csv", help="write per-plane sectional curvatures (analyze)")
        p.add_argument("--beta", type=float)
        p.add_argument("--d-conformal", action="store_true")
        p.add_argument("--tol-scale", type=float, help="multiply thresholds (selftest)")
    return parser


def _merge_flags(raw: dict, args) -> dict:
    raw = dict(raw)
    for flag, key in (("seed", "seed"), ("samples", "sample_count"), ("out", "output_path"),
                      ("csv", "csv_path"), ("beta", "beta"), ("tol_scale", "tol_scale")):
        value = getattr(args, flag)
        if value is not None:
            raw[key] = value
    if args.d_conformal:
        raw["d_conformal"] = True
    return raw


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fn, n_models = COMMANDS[args.command]
    try:
        cfg = parse_config(_merge_flags(load_config(args.config), args), n_models)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    start = time.perf_counter()
    try:
        report = fn(cfg)
    except (ConfigParseError, InvalidBeta, NotKmuModel) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionFailed as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except Exception:  # noqa: BLE001 - report any crash as an internal error
        log.exception("internal error in %s", args.command)
        return EXIT_INTERNAL
    report.seconds = time.perf_counter() - start

    text = dumps(report.to_dict())
    if cfg.output_path:
        Path(cfg.output_path).write_text(text + "\n", encoding="utf-8")
        print("\n".join(report.summary_lines()))
    else:
        print(text)
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
