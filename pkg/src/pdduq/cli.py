"""Command-line front end: config-driven runs and benchmark reproductions.

``pdduq run CONFIG.json [--threads K] [--output DIR]`` executes one analysis
described by a versioned JSON config.  ``pdduq reproduce ID`` runs a
built-in benchmark configuration and writes comparison tables against
embedded reference values.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import special

from . import __version__
from .distributions import SCORE_OPTIONS, DesignBinding, DistributionError, Marginal, Role, marginal_from_dict
from .models import (
    ModelError,
    PerformanceModel,
    TrigPolyData,
    builtin,
    trig_poly_moment_sensitivities,
)
from .moments import MomentError, build_score_expansion, mean_sensitivity, moment_analysis, second_moment_sensitivity
from .pdd import compute_coefficients, evaluation_bound
from .reliability import (
    EventSpec,
    SaddlepointError,
    crude_mcs_fd,
    crude_mcs_sf,
    crude_mcs_sf_cdf,
    mcs_cdf,
    mcs_failure_probability,
    spa_analysis,
)

CONFIG_SCHEMA = "pdduq-config"
CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class AnalysisError(RuntimeError):
    """An analysis step failed; the message names the step."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass
class AnalysisConfig:
    """Validated analysis configuration with all defaults resolved."""

    model: dict
    inputs: list
    bindings: list
    S: int
    m: int
    R: int
    n: int
    Q: int = 4
    option: str = "auto"
    m_prime: int | None = None
    S_bar: int | None = None
    m_bar: int | None = None
    moments: bool = True
    reliability: dict | None = None
    cdf: dict | None = None
    samples: int = 10**6
    seed: int = 0
    baseline: str | None = None
    score_truncated_gaussian: str = "table2"
    output: str = "pdduq-output"
    raw: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.inputs)

    def resolved(self) -> dict:
        """Config echo with every default filled in (for provenance)."""
        return {
            "schema": CONFIG_SCHEMA,
            "version": CONFIG_VERSION,
            "model": self.model,
            "inputs": [x.to_dict() for x in self.inputs],
            "design": [b.to_dict() for b in self.bindings],
            "truncation": {
                "S": self.S,
                "m": self.m,
                "R": self.R,
                "n": self.n,
                "Q": self.Q,
                "option": self.option,
                "m_prime": self.m_prime,
                "S_bar": self.S_bar,
                "m_bar": self.m_bar,
            },
            "analyses": {"moments": self.moments, "reliability": self.reliability, "cdf": self.cdf},
            "mcs": {"samples": self.samples, "seed": self.seed},
            "baseline": self.baseline,
            "score": {"truncated_gaussian": self.score_truncated_gaussian},
            "output": self.output,
        }


def _int(d: dict, key: str, path: str, default=None, minimum: int | None = None):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or float(v) != int(v):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    v = int(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}, got {v}")
    return v


def _parse_inputs(spec, path="inputs") -> list[Marginal]:
    if isinstance(spec, dict) and "repeat" in spec:
        k = _int(spec, "repeat", path, minimum=1)
        if "marginal" not in spec:
            raise ConfigError(f"{path}.marginal", "missing")
        one = _parse_inputs([spec["marginal"]], f"{path}.marginal")[0]
        return [one] * k
    if not isinstance(spec, list) or not spec:
        raise ConfigError(path, "expected a non-empty list of marginals or {repeat, marginal}")
    out = []
    for i, d in enumerate(spec):
        if isinstance(d, dict) and "repeat" in d:
            out.extend(_parse_inputs(d, f"{path}[{i}]"))
            continue
        try:
            out.append(marginal_from_dict(d))
        except (DistributionError, TypeError, AttributeError) as exc:
            raise ConfigError(f"{path}[{i}]", str(exc)) from None
    return out


def _parse_design(spec, N: int, path="design") -> list[DesignBinding]:
    if spec is None:
        return []
    if not isinstance(spec, list):
        raise ConfigError(path, "expected a list of design bindings")
    out = []
    for k, d in enumerate(spec):
        p = f"{path}[{k}]"
        if not isinstance(d, dict):
            raise ConfigError(p, "expected an object")
        try:
            if "targets" in d:
                b = DesignBinding.from_dict(d)
            else:
                if "role" not in d:
                    raise ConfigError(f"{p}.role", "missing")
                idx = d.get("indices", "all")
                idx = range(N) if idx == "all" else [int(i) for i in idx]
                b = DesignBinding.shared(Role(d["role"]), idx, d.get("name", ""))
        except ConfigError:
            raise
        except (ValueError, DistributionError, TypeError) as exc:
            raise ConfigError(p, str(exc)) from None
        out.append(b)
    return out


def parse_config(raw: dict, output: str | None = None) -> AnalysisConfig:
    """Validate a config dictionary and resolve defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    if raw.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
        raise ConfigError("schema", f"expected {CONFIG_SCHEMA!r}")
    if raw.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ConfigError("version", f"unsupported version {raw.get('version')!r}")
    model = raw.get("model")
    if not isinstance(model, dict) or "builtin" not in model:
        raise ConfigError("model.builtin", "missing")
    if "inputs" not in raw:
        raise ConfigError("inputs", "missing")
    inputs = _parse_inputs(raw["inputs"])
    N = len(inputs)
    bindings = _parse_design(raw.get("design"), N)
    for k, b in enumerate(bindings):
        try:
            b.validate(inputs)
        except DistributionError as exc:
            raise ConfigError(f"design[{k}]", str(exc)) from None
    tr = raw.get("truncation", {})
    if not isinstance(tr, dict):
        raise ConfigError("truncation", "expected an object")
    S = _int(tr, "S", "truncation", 1, minimum=1)
    m = _int(tr, "m", "truncation", 3, minimum=1)
    if S > N:
        raise ConfigError("truncation.S", f"must be <= N ({N}), got {S}")
    R = _int(tr, "R", "truncation", S)
    if R < S or R > N:
        raise ConfigError("truncation.R", f"must satisfy S <= R <= N, got {R}")
    n = _int(tr, "n", "truncation", m + 1)
    if n < m + 1:
        raise ConfigError("truncation.n", f"must be >= m + 1 ({m + 1}), got {n}")
    Q = _int(tr, "Q", "truncation", 4)
    if Q not in (2, 3, 4):
        raise ConfigError("truncation.Q", f"must be 2, 3 or 4, got {Q}")
    option = str(tr.get("option", "auto"))
    if option.upper() not in ("I", "II", "AUTO"):
        raise ConfigError("truncation.option", f"must be 'I', 'II' or 'auto', got {option!r}")
    m_prime = _int(tr, "m_prime", "truncation", None, minimum=1)
    S_bar = _int(tr, "S_bar", "truncation", None, minimum=1)
    m_bar = _int(tr, "m_bar", "truncation", None, minimum=1)
    an = raw.get("analyses", {"moments": True})
    if not isinstance(an, dict):
        raise ConfigError("analyses", "expected an object")
    rel = an.get("reliability")
    if rel is not None:
        if not isinstance(rel, dict):
            raise ConfigError("analyses.reliability", "expected an object")
        rel = {"method": "spa", "event": "component", "xi": 0.0, **rel}
        if rel["method"] not in ("spa", "mcs"):
            raise ConfigError("analyses.reliability.method", "must be 'spa' or 'mcs'")
        try:
            EventSpec(rel["event"])
        except ValueError as exc:
            raise ConfigError("analyses.reliability.event", str(exc)) from None
        if rel["method"] == "spa" and rel["event"] != "component":
            raise ConfigError("analyses.reliability.event", "SPA handles component events only; use method 'mcs'")
    cdf = an.get("cdf")
    if cdf is not None:
        if not isinstance(cdf, dict) or "xi" not in cdf:
            raise ConfigError("analyses.cdf.xi", "missing")
        xi = cdf["xi"]
        if isinstance(xi, dict):
            try:
                xi = np.linspace(float(xi["start"]), float(xi["stop"]), int(xi["num"])).tolist()
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("analyses.cdf.xi", f"expected list or {{start, stop, num}} ({exc})") from None
        cdf = {"xi": [float(v) for v in xi], "output": int(cdf.get("output", 0))}
    mc = raw.get("mcs", {})
    samples = _int(mc, "samples", "mcs", 10**6, minimum=1)
    seed = _int(mc, "seed", "mcs", 0, minimum=0)
    baseline = raw.get("baseline")
    if baseline not in (None, "mcs-sf", "mcs-fd"):
        raise ConfigError("baseline", "must be null, 'mcs-sf' or 'mcs-fd'")
    score = raw.get("score", {})
    tg = score.get("truncated_gaussian", "table2") if isinstance(score, dict) else None
    if tg not in ("table2", "numeric"):
        raise ConfigError("score.truncated_gaussian", "must be 'table2' or 'numeric'")
    return AnalysisConfig(
        model=dict(model),
        inputs=inputs,
        bindings=bindings,
        S=S,
        m=m,
        R=R,
        n=n,
        Q=Q,
        option=option,
        m_prime=m_prime,
        S_bar=S_bar,
        m_bar=m_bar,
        moments=bool(an.get("moments", True)),
        reliability=rel,
        cdf=cdf,
        samples=samples,
        seed=seed,
        baseline=baseline,
        score_truncated_gaussian=tg,
        output=output or raw.get("output", "pdduq-output"),
        raw=raw,
    )


def build_model(spec: dict, base_dir: Path | None = None) -> PerformanceModel:
    opts = {k: v for k, v in spec.items() if k != "builtin"}
    if "data" in opts and base_dir is not None and not Path(opts["data"]).is_absolute():
        opts["data"] = str(base_dir / opts["data"])
    try:
        return builtin(spec["builtin"], **opts)
    except (ModelError, OSError, ValueError) as exc:
        raise ConfigError("model", str(exc)) from None


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dump(path: Path, obj) -> None:
    _write(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _step(name: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (MomentError, SaddlepointError, ModelError, ValueError, np.linalg.LinAlgError) as exc:
        raise AnalysisError(f"{name}: {exc}") from exc


def run_analysis(cfg: AnalysisConfig, threads: int | None = None, base_dir: Path | None = None, quiet=False) -> dict:
    """Execute every requested analysis and write result files; returns a summary."""
    saved = SCORE_OPTIONS["truncated_gaussian"]
    SCORE_OPTIONS["truncated_gaussian"] = cfg.score_truncated_gaussian
    try:
        return _run_analysis(cfg, threads, base_dir, quiet)
    finally:
        SCORE_OPTIONS["truncated_gaussian"] = saved


def _run_analysis(cfg: AnalysisConfig, threads, base_dir, quiet) -> dict:
    threads = threads or os.cpu_count() or 1
    out = Path(cfg.output)
    model = build_model(cfg.model, base_dir)
    if model.N != cfg.N:
        raise ConfigError("inputs", f"model {model.name} has N = {model.N}, but {cfg.N} inputs are given")
    t0 = time.perf_counter()
    sur = _step("pdd_core", compute_coefficients, model, cfg.inputs, cfg.S, cfg.m, cfg.R, cfg.n)
    surrogates = sur if isinstance(sur, list) else [sur]
    n_eval = model.evaluations
    bound = evaluation_bound(cfg.N, cfg.R, cfg.n)
    _dump(out / "surrogate.json", [s.to_dict() for s in surrogates] if len(surrogates) > 1 else surrogates[0].to_dict())
    summary: dict[str, Any] = {
        "model": model.name,
        "N": cfg.N,
        "function_evaluations": n_eval,
        "evaluation_bound": bound,
        "terms": len(surrogates[0].coeffs),
    }
    names = [b.name or f"d{k}" for k, b in enumerate(cfg.bindings)]
    rep = None
    need_moments = cfg.moments or (cfg.reliability and cfg.reliability["method"] == "spa")
    if need_moments:
        if len(surrogates) > 1 and cfg.moments and not (cfg.reliability and cfg.reliability["method"] == "spa"):
            reports = [
                _step("moment_sens", moment_analysis, s, cfg.bindings, cfg.Q, cfg.option, cfg.S_bar, cfg.m_bar, cfg.m_prime)
                for s in surrogates
            ]
            for q, r in enumerate(reports):
                _write(out / f"moments_{q}.csv", r.to_csv())
            summary["moments"] = [list(map(float, r.moments)) for r in reports]
        else:
            rep = _step(
                "moment_sens",
                moment_analysis,
                surrogates[0],
                cfg.bindings,
                cfg.Q,
                cfg.option,
                cfg.S_bar,
                cfg.m_bar,
                cfg.m_prime,
            )
            _write(out / "moments.csv", rep.to_csv())
            _dump(out / "moments.json", rep.to_dict())
            summary["moments"] = list(map(float, rep.moments))
    ev = None
    if cfg.reliability:
        ev = EventSpec(cfg.reliability["event"])
        if cfg.reliability["method"] == "spa":
            if len(surrogates) != 1:
                raise AnalysisError("reliability: SPA needs a single-output model")
            rr = _step("reliability", spa_analysis, rep.moments, rep.sensitivities, cfg.reliability["xi"], names)
        else:
            xi = float(cfg.reliability["xi"])
            shifted = surrogates if xi == 0 else [_shifted(s, xi) for s in surrogates]
            rr = _step("reliability", mcs_failure_probability, ev, shifted, cfg.samples, cfg.seed, cfg.bindings, threads)
        rr.design_names = names
        _dump(out / "reliability.json", rr.to_dict())
        _write(out / "reliability.csv", rr.to_csv())
        summary["p_f"] = rr.p_f
        summary["p_f_sensitivities"] = list(map(float, rr.sensitivities))
        summary["reliability_method"] = rr.method
    if cfg.cdf:
        q = cfg.cdf["output"]
        cr = _step("reliability", mcs_cdf, surrogates[q], cfg.cdf["xi"], cfg.bindings, cfg.samples, cfg.seed, threads)
        cr.design_names = names
        _write(out / "cdf.csv", cr.to_csv())
    if cfg.baseline:
        model.reset_counter()
        base = {}
        if cfg.reliability:
            fn = crude_mcs_sf if cfg.baseline == "mcs-sf" else crude_mcs_fd
            br = _step(
                "baseline", fn, _xi_model(model, cfg.reliability["xi"]), cfg.inputs, ev, cfg.samples, cfg.seed, cfg.bindings, threads
            )
            br.design_names = names
            _dump(out / "baseline.json", br.to_dict())
            _write(out / "baseline.csv", br.to_csv())
            base["p_f"] = br.p_f
        if cfg.cdf and cfg.baseline == "mcs-sf":
            cb = _step(
                "baseline",
                crude_mcs_sf_cdf,
                _output_model(model, cfg.cdf["output"]),
                cfg.inputs,
                cfg.cdf["xi"],
                cfg.samples,
                cfg.seed,
                cfg.bindings,
                threads,
            )
            cb.design_names = names
            _write(out / "baseline_cdf.csv", cb.to_csv())
        base["model_evaluations"] = model.evaluations
        summary["baseline"] = base
    meta = {"version": __version__, "config": cfg.resolved(), "summary": summary}
    _dump(out / "run.json", _clean(meta))
    if not quiet:
        _print_summary(summary, names, time.perf_counter() - t0)
    return summary


def _shifted(s, xi):
    """Surrogate of ``y - xi`` (so that failure is ``y < xi``)."""
    from dataclasses import replace

    return replace(s, y_empty=s.y_empty - xi, coeffs=s.coeffs.copy())


def _xi_model(model: PerformanceModel, xi: float):
    if xi == 0:
        return model

    def f(X):
        return model.evaluate_batch(X) - xi

    return f


def _output_model(model: PerformanceModel, q: int):
    def f(X):
        Y = model.evaluate_batch(X)
        return Y if Y.ndim == 1 else Y[:, q]

    return f


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _print_summary(summary: dict, names: list, elapsed: float) -> None:
    rows = [
        ("model", summary["model"]),
        ("N", summary["N"]),
        ("function evaluations", f"{summary['function_evaluations']} (bound {summary['evaluation_bound']})"),
        ("PDD terms", summary["terms"]),
    ]
    if "moments" in summary:
        mom = summary["moments"]
        if mom and isinstance(mom[0], list):
            for q, mm in enumerate(mom):
                rows.append((f"moments[{q}]", ", ".join(f"{v:.6e}" for v in mm)))
        else:
            rows.append(("moments", ", ".join(f"{v:.6e}" for v in mom)))
    if "p_f" in summary:
        rows.append((f"P_F ({summary['reliability_method']})", f"{summary['p_f']:.6e}"))
        for nm, v in zip(names, summary["p_f_sensitivities"]):
            rows.append((f"dP_F/d{nm}", f"{v:.6e}"))
    if "baseline" in summary and "p_f" in summary["baseline"]:
        rows.append(("baseline P_F", f"{summary['baseline']['p_f']:.6e}"))
    rows.append(("wall time [s]", f"{elapsed:.2f}"))
    w = max(len(r[0]) for r in rows)
    for k, v in rows:
        print(f"{k:<{w}}  {v}")


# --------------------------------------------------------------------------
# reproduce
# --------------------------------------------------------------------------

EXAMPLES = ("example1", "example2-exp", "example2-weibull", "example3-n10", "example3-n100", "example4", "example5")

# published benchmark values; provenance strings travel into every comparison table
REFERENCE = {
    "example3-n10": {
        "exact": (1.350e-3, 1.401e-2, 1.330e-2),
        "spa_bivariate_I": (1.349e-3, 1.401e-2, 1.330e-2),
        "mcs_bivariate": (1.397e-3, 1.447e-2, 1.371e-2),
    },
    "example3-n100": {
        "exact": (1.350e-3, 4.432e-2, 1.330e-2),
        "spa_bivariate_II": (1.320e-3, 6.412e-2, 1.277e-2),
        "mcs_bivariate": (1.344e-3, 4.413e-2, 1.291e-2),
    },
}


def example3_exact(N: int, mu: float = 0.0, sigma: float = 1.0) -> tuple[float, float, float]:
    """Closed-form ``P[sum X > 3 sqrt(N)]`` and its derivatives in ``mu`` and ``sigma``."""
    beta = (3.0 * math.sqrt(N) - N * mu) / (math.sqrt(N) * sigma)
    pdf = math.exp(-0.5 * beta * beta) / math.sqrt(2 * math.pi)
    return float(special.ndtr(-beta)), pdf * math.sqrt(N) / sigma, pdf * beta / sigma


def _comparison_csv(rows: list[tuple]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(["quantity", "computed", "reference", "relative_difference", "provenance"])
    for q, c, r, prov in rows:
        rel = (c - r) / abs(r) if r not in (0, None) else float("nan")
        wr.writerow([q, format(float(c), ".17g"), format(float(r), ".17g"), format(rel, ".17g"), prov])
    return buf.getvalue()


def _print_comparison(rows: list[tuple]) -> None:
    w = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{w}}  {'computed':>14}  {'reference':>14}  {'rel.diff':>10}  provenance")
    for q, c, r, prov in rows:
        rel = (c - r) / abs(r) if r else float("nan")
        print(f"{q:<{w}}  {c:>14.6e}  {r:>14.6e}  {rel:>10.2e}  {prov}")


def example_config(example_id: str, S=None, m=None, samples=None, seed=None, baseline=None, method=None) -> dict:
    """Config dictionary of a built-in benchmark, before overrides are validated."""
    seed = 2012 if seed is None else seed
    if example_id in ("example3-n10", "example3-n100"):
        N = 10 if example_id == "example3-n10" else 100
        method = method or ("spa" if N == 10 else "mcs")
        return {
            "model": {"builtin": "gauss_sum", "N": N},
            "inputs": {"repeat": N, "marginal": {"kind": "gaussian", "mu": 0.0, "sigma": 1.0}},
            "design": [{"name": "mu", "role": "mean"}, {"name": "sigma", "role": "stdev"}],
            "truncation": {"S": S or 2, "m": m or 3, "Q": 4, "option": "I" if N == 10 else "II", "S_bar": 2},
            "analyses": {"moments": True, "reliability": {"method": method, "event": "component"}},
            "mcs": {"samples": samples or 10**6, "seed": seed},
            "baseline": baseline,
        }
    if example_id in ("example2-exp", "example2-weibull"):
        if example_id == "example2-exp":
            marg = {"kind": "exponential", "rate": 1.0}
            design = [{"name": "lambda", "role": "rate"}]
        else:
            marg = {"kind": "weibull", "scale": 1.0, "shape": 0.5}
            design = [{"name": "lambda", "role": "scale"}, {"name": "k", "role": "shape"}]
        return {
            "model": {"builtin": "cubic4"},
            "inputs": {"repeat": 4, "marginal": marg},
            "design": design,
            "truncation": {"S": S or 3, "m": m or 3},
            "analyses": {"moments": False, "cdf": {"xi": {"start": 300.0, "stop": 510.0, "num": 43}}},
            "mcs": {"samples": samples or 10**5, "seed": seed},
            "baseline": baseline or "mcs-sf",
        }
    if example_id == "example4":
        return example4_config(0.1, S, m, samples, seed, baseline, method)
    if example_id == "example5":
        from .models import TRUSS21_MEAN_AREAS

        return {
            "model": {"builtin": "truss21"},
            "inputs": [{"kind": "lognormal", "mu": float(a), "sigma": 0.1 * float(a)} for a in TRUSS21_MEAN_AREAS],
            "design": [{"name": f"mu{i}", "targets": [[i, "mean"]]} for i in range(21)],
            "truncation": {"S": S or 2, "m": m or 3},
            "analyses": {"moments": False, "reliability": {"method": "mcs", "event": "series"}},
            "mcs": {"samples": samples or 10**5, "seed": seed},
            "baseline": baseline or "mcs-sf",
        }
    raise ConfigError("example_id", f"unknown example {example_id!r}; choose from {', '.join(EXAMPLES)}")


def example4_config(c: float, S=None, m=None, samples=None, seed=None, baseline=None, method=None) -> dict:
    means = [120.0, 120.0, 120.0, 120.0, 50.0, 40.0]
    return {
        "model": {"builtin": "linear6"},
        "inputs": [{"kind": "lognormal", "mu": v, "sigma": c * v} for v in means],
        "design": [{"name": f"mu{i}", "targets": [[i, "mean"]]} for i in range(6)]
        + [{"name": f"sigma{i}", "targets": [[i, "stdev"]]} for i in range(6)],
        "truncation": {"S": S or 1, "m": m or 1, "Q": 4, "option": "I"},
        "analyses": {"moments": True, "reliability": {"method": method or "spa", "event": "component"}},
        "mcs": {"samples": samples or 10**6, "seed": 2012 if seed is None else seed},
        "baseline": baseline or "mcs-sf",
    }


def reproduce(
    example_id: str,
    output: str | None = None,
    S=None,
    m=None,
    samples=None,
    seed=None,
    baseline=None,
    method=None,
    threads=None,
    quiet=False,
) -> dict:
    """Run a benchmark and write ``comparison.csv`` next to the run outputs."""
    out = Path(output or f"pdduq-{example_id}")
    if example_id == "example1":
        return _reproduce_example1(out, S, m, quiet)
    if example_id == "example4":
        results = {}
        rows = []
        for c in (0.1, 0.7):
            raw = example4_config(c, S, m, samples, seed, baseline, method)
            cfg = parse_config(raw, str(out / f"c{c}"))
            summ = run_analysis(cfg, threads, quiet=True)
            ref = summ["baseline"]["p_f"]
            prov = f"crude MCS/SF, L={cfg.samples}, same seed" + ("" if c < 0.5 else "; degradation reported, not asserted")
            rows.append((f"P_F (c={c})", summ["p_f"], ref, prov))
            base = json.loads((out / f"c{c}" / "baseline.json").read_text())
            for nm, a, b in zip(base["design_names"], summ["p_f_sensitivities"], base["sensitivities"]):
                rows.append((f"dP_F/d{nm} (c={c})", a, b, prov))
            results[c] = summ
        _write(out / "comparison.csv", _comparison_csv(rows))
        if not quiet:
            _print_comparison(rows)
        return {"rows": rows, "runs": results}
    raw = example_config(example_id, S, m, samples, seed, baseline, method)
    cfg = parse_config(raw, str(out))
    summ = run_analysis(cfg, threads, quiet=quiet)
    rows = []
    if example_id.startswith("example3"):
        N = cfg.N
        exact = example3_exact(N)
        labels = ("P_F", "dP_F/dmu", "dP_F/dsigma")
        vals = [summ["p_f"]] + summ["p_f_sensitivities"]
        for lab, v, e in zip(labels, vals, exact):
            rows.append((lab, v, e, "closed form (exact)"))
        refs = REFERENCE[example_id]
        key = [k for k in refs if k != "exact" and k.startswith(cfg.reliability["method"])]
        for k in key:
            for lab, v, e in zip(labels, vals, refs[k]):
                rows.append((lab, v, e, f"published {k.replace('_', ' ')}"))
        rows.append(("function evaluations", summ["function_evaluations"], summ["evaluation_bound"], "cost formula"))
    elif example_id.startswith("example2"):
        a = _read_cdf(out / "cdf.csv")
        b = _read_cdf(out / "baseline_cdf.csv")
        diff = np.abs(a - b)
        rows.append(("max |CDF difference|", float(diff[:, 1].max()), 0.0, "crude MCS/SF on original model, same seed"))
        for k in range(3, a.shape[1]):
            rows.append(
                (f"max |sensitivity difference| col {k - 3}", float(diff[:, k].max()), 0.0, "crude MCS/SF, same seed")
            )
    elif example_id == "example5":
        base = json.loads((out / "baseline.json").read_text())
        prov = f"crude MCS/{'SF' if cfg.baseline == 'mcs-sf' else 'FD'} on reconstructed truss, L={cfg.samples}"
        rows.append(("P_F", summ["p_f"], base["p_f"], prov))
        for nm, x, y in zip(base["design_names"], summ["p_f_sensitivities"], base["sensitivities"]):
            rows.append((f"dP_F/d{nm}", x, y, prov))
        rows.append(("truss solves (surrogate)", summ["function_evaluations"], 3445, "published FEA count"))
    _write(out / "comparison.csv", _comparison_csv(rows))
    if not quiet:
        _print_comparison(rows)
    return {"rows": rows, "summary": summ}


def _read_cdf(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return np.array([[float(v) for v in r] for r in rows])


def example1_errors(S_values=(1, 2), m_values=range(1, 9), m_prime: int = 2, data: TrigPolyData | None = None):
    """Relative errors of PDD moment sensitivities for the trig-polynomial at ``(mu, sigma) = (0, 1)``."""
    from .distributions import Gaussian
    from .models import trig_poly

    data = TrigPolyData.default() if data is None else data
    exact = trig_poly_moment_sensitivities(data, 0.0, 1.0)
    model = trig_poly(data)
    inputs = [Gaussian(0.0, 1.0)] * model.N
    binds = [DesignBinding.shared(Role.MEAN, range(model.N), "mu"), DesignBinding.shared(Role.STDEV, range(model.N), "sigma")]
    rows = []
    for S in S_values:
        for m in m_values:
            sur = compute_coefficients(model, inputs, S, m)
            sc = [build_score_expansion(b, inputs, m_prime) for b in binds]
            approx = np.vstack([mean_sensitivity(sur, sc), second_moment_sensitivity(sur, sc)])
            rel = np.abs(approx - exact) / np.abs(exact)
            for r in range(2):
                for k, nm in enumerate(("mu", "sigma")):
                    rows.append((S, m, f"dm{r + 1}/d{nm}", approx[r, k], exact[r, k], rel[r, k]))
    return rows


def _reproduce_example1(out: Path, S, m, quiet) -> dict:
    S_values = (S,) if S else (1, 2)
    m_values = range(1, (m or 8) + 1)
    rows = example1_errors(S_values, m_values)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(["S", "m", "quantity", "computed", "exact", "relative_error"])
    for S_, m_, q, a, e, r in rows:
        wr.writerow([S_, m_, q, format(a, ".17g"), format(e, ".17g"), format(r, ".17g")])
    _write(out / "error_vs_m.csv", buf.getvalue())
    if not quiet:
        print(f"{'S':>2} {'m':>2}  {'quantity':<10} {'relative error':>14}")
        for S_, m_, q, a, e, r in rows:
            print(f"{S_:>2} {m_:>2}  {q:<10} {r:>14.3e}")
    return {"rows": rows}


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdduq", description="PDD-based moment, reliability and sensitivity analysis")
    p.add_argument("--version", action="version", version=f"pdduq {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an analysis from a JSON config")
    r.add_argument("config")
    r.add_argument("--threads", type=int, default=None, help="worker threads (default: logical cores)")
    r.add_argument("--output", default=None, help="output directory (overrides the config)")
    q = sub.add_parser("reproduce", help="run a built-in benchmark")
    q.add_argument("example_id", choices=EXAMPLES)
    q.add_argument("--S", type=int, default=None)
    q.add_argument("--m", type=int, default=None)
    q.add_argument("--samples", type=int, default=None)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--baseline", choices=("mcs-sf", "mcs-fd"), default=None)
    q.add_argument("--method", choices=("spa", "mcs"), default=None)
    q.add_argument("--threads", type=int, default=None)
    q.add_argument("--output", default=None)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            path = Path(args.config)
            try:
                raw = json.loads(path.read_text())
            except OSError as exc:
                raise ConfigError("config", str(exc)) from None
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"invalid JSON: {exc}") from None
            cfg = parse_config(raw, args.output)
            run_analysis(cfg, args.threads, base_dir=path.parent)
        else:
            reproduce(
                args.example_id,
                args.output,
                args.S,
                args.m,
                args.samples,
                args.seed,
                args.baseline,
                args.method,
                args.threads,
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
