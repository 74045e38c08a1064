"""Command-line runner for single protocol evaluations, sweeps and sampling.

Usage::

    twobox --config experiment.json [--seed N] [--out PATH]
           [--format json|csv] [--quiet]

The config file is a JSON object whose required ``mode`` key selects what
to compute; the remaining keys are mode parameters (see the README for the
full schema). Results are written as a JSON document with ``mode``,
``result`` and ``provenance`` sections, or as CSV for tabular modes:
``param,value,metric,stderr`` rows for sweeps, ``trial,signal,final_box``
rows for trial traces. Without ``--out`` (or an ``out`` config key) the
document goes to stdout and the one-line summary to stderr; with a path
the file is written atomically (temp file, then rename) and the summary
goes to stdout.

Exit codes: 0 success, 2 malformed config or arguments, 3 well-formed
request whose answer is undefined (zero-probability postselection,
orthogonal postselection, divergent target value).

The environment variable ``TWOBOX_WORKERS`` sets the thread count for
sweep evaluation; output bytes are identical for every worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    ClassicalMatchedProtocol,
    QuantumProtocol,
    projector_weak_values,
    quantum_postselection_shift,
    sweep_metric,
)
from .classical import ClassicalParams, conditional_mean, fc_match_params, joint_distribution, unconditional_mean
from .contextual import ContextualValues
from .errors import DomainError, TwoBoxError, ValidationError
from .montecarlo import (
    CountTable,
    estimate_conditional_mean,
    gof_test,
    sample_classical,
    sample_classical_trace,
    sample_quantum,
    sample_quantum_trace,
)
from .quantum import (
    MeasurementModel,
    Postselection,
    TwoLevelState,
    conditional_mean_quantum,
    expectation,
    joint_outcome_probs,
    postselection_probability,
    quantum_disturbance,
    weak_value,
)

__all__ = ["MODES", "main", "run", "validate_result_document"]

MODES = ("classical", "quantum", "sweep", "match", "witness", "sample")

_MISSING = object()


@dataclass
class _ModeOutcome:
    result: dict
    summary: str
    csv_header: tuple | None = None
    csv_rows: list | None = None


def _number(cfg: dict, key: str, default=_MISSING) -> float:
    if key not in cfg:
        if default is _MISSING:
            raise ValidationError(f"config key {key!r} is required for mode {cfg.get('mode')!r}")
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"config key {key!r} must be a finite number, got {value!r}")
    return float(value)


def _integer(cfg: dict, key: str, default=_MISSING, minimum: int = 0) -> int:
    if key not in cfg:
        if default is _MISSING:
            raise ValidationError(f"config key {key!r} is required for mode {cfg.get('mode')!r}")
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"config key {key!r} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _string(cfg: dict, key: str, allowed: tuple) -> str:
    value = cfg.get(key)
    if value not in allowed:
        raise ValidationError(f"config key {key!r} must be one of {list(allowed)}, got {value!r}")
    return value


def _flag(cfg: dict, key: str, default: bool = False) -> bool:
    value = cfg.get(key, default)
    if not isinstance(value, bool):
        raise ValidationError(f"config key {key!r} must be true or false, got {value!r}")
    return value


def _postselection_state(theta: float) -> TwoLevelState:
    return Postselection(theta % (2.0 * math.pi)).state


def _run_classical(cfg: dict, seed, workers) -> _ModeOutcome:
    params = ClassicalParams(
        p1=_number(cfg, "p1"), g=_number(cfg, "g"), q=_number(cfg, "q"), q0=_number(cfg, "q0")
    )
    final_box = _integer(cfg, "final_box", default=2)
    if final_box not in (1, 2):
        raise ValidationError(f"config key 'final_box' must be 1 or 2, got {final_box!r}")
    dist = joint_distribution(params)
    cv = ContextualValues.symmetric(params.g)
    mean = conditional_mean(dist, cv, final_box)
    result = {
        "joint": dist.table.tolist(),
        "p_signal": dist.p_signal("S"),
        "p_box1": dist.p_box(1),
        "p_box2": dist.p_box(2),
        "alpha_s": cv.alpha_s,
        "alpha_sbar": cv.alpha_sbar,
        "unconditional_mean": unconditional_mean(dist, cv),
        "final_box": final_box,
        "conditional_mean": mean,
    }
    summary = (
        f"classical: conditional mean {mean:.6g} in final box {final_box} "
        f"(P = {dist.p_box(final_box):.6g}), unconditional {result['unconditional_mean']:.6g}"
    )
    return _ModeOutcome(result=result, summary=summary)


def _run_quantum(cfg: dict, seed, workers) -> _ModeOutcome:
    i = TwoLevelState.from_occupation(_number(cfg, "p1"))
    theta = _number(cfg, "theta")
    f = _postselection_state(theta)
    aw = weak_value(i, f)
    overlap = complex(np.conj(f.vector) @ i.vector)
    result = {
        "weak_value": aw.real,
        "weak_value_imag": aw.imag,
        "expectation": expectation(i),
        "overlap_probability": abs(overlap) ** 2,
    }
    summary = f"quantum: weak value {aw.real:.6g}, expectation {result['expectation']:.6g}"
    if "lambda" in cfg:
        lam = _number(cfg, "lambda")
        model = MeasurementModel(lam)
        mean = conditional_mean_quantum(i, model, f)
        result.update(
            {
                "lambda": lam,
                "conditional_mean": mean,
                "postselection_probability": postselection_probability(i, model, f),
                "postselection_shift": quantum_postselection_shift(i, f, lam),
                "disturbance": quantum_disturbance(i, model),
            }
        )
        summary += f"; conditional mean {mean:.6g} at lambda = {lam:.6g}"
    return _ModeOutcome(result=result, summary=summary)


def _run_match(cfg: dict, seed, workers) -> _ModeOutcome:
    theta = _number(cfg, "theta")
    g = _number(cfg, "g")
    params = fc_match_params(theta, g)
    dist = joint_distribution(params)
    cv = ContextualValues.symmetric(g)
    mean = conditional_mean(dist, cv, 2)
    result = {
        "p1": params.p1,
        "g": params.g,
        "q": params.q,
        "q0": params.q0,
        "conditional_mean": mean,
        "p_box2": dist.p_box(2),
        "target": 1.0 / math.cos(theta),
    }
    summary = (
        f"match: q = {params.q:.6g}, q0 = {params.q0:.6g} reproduce "
        f"conditional mean {mean:.6g} at bias g = {g:.6g}"
    )
    return _ModeOutcome(result=result, summary=summary)


def _run_witness(cfg: dict, seed, workers) -> _ModeOutcome:
    i = TwoLevelState.from_occupation(_number(cfg, "p1"))
    f = _postselection_state(_number(cfg, "theta"))
    pw = projector_weak_values(i, f)
    aw = weak_value(i, f)
    result = {
        "w1": pw.w1.real,
        "w1_imag": pw.w1.imag,
        "w2": pw.w2.real,
        "w2_imag": pw.w2.imag,
        "negative": pw.negative,
        "weak_value": aw.real,
    }
    summary = (
        f"witness: w1 = {pw.w1.real:.6g}, w2 = {pw.w2.real:.6g}, "
        f"negative = {'yes' if pw.negative else 'no'}"
    )
    return _ModeOutcome(result=result, summary=summary)


def _strength_grid(cfg: dict) -> np.ndarray:
    raw = cfg.get("strengths")
    if isinstance(raw, list):
        if not raw:
            raise ValidationError("config key 'strengths' must not be an empty list")
        for value in raw:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"strengths entries must be finite numbers, got {value!r}")
        return np.asarray(raw, dtype=float)
    if isinstance(raw, dict):
        start = _number(raw, "from")
        stop = _number(raw, "to")
        points = _integer(raw, "points", minimum=1)
        scale = raw.get("scale", "linear")
        if scale not in ("linear", "log"):
            raise ValidationError(f"strengths scale must be 'linear' or 'log', got {scale!r}")
        if scale == "log":
            if start <= 0 or stop <= 0:
                raise ValidationError("log-scale strengths require positive 'from' and 'to'")
            return np.geomspace(start, stop, points)
        return np.linspace(start, stop, points)
    raise ValidationError(
        "sweep mode requires 'strengths': either a list of values or "
        "{'from': a, 'to': b, 'points': n, 'scale': 'linear'|'log'}"
    )


def _protocol_from_config(cfg: dict):
    name = _string(cfg, "protocol", ("classical", "quantum"))
    if name == "classical":
        return ClassicalMatchedProtocol(theta=_number(cfg, "theta"))
    return QuantumProtocol(p1=_number(cfg, "p1"), theta=_number(cfg, "theta"))


def _run_sweep(cfg: dict, seed, workers) -> _ModeOutcome:
    protocol = _protocol_from_config(cfg)
    metric = cfg.get("metric")
    if not isinstance(metric, str):
        raise ValidationError(f"config key 'metric' must be a string, got {metric!r}")
    grid = _strength_grid(cfg)
    res = sweep_metric(protocol, metric, grid, workers=workers)
    points = [
        {"param": float(s), "value": float(v), "stderr": None}
        for s, v in zip(res.strengths, res.values)
    ]
    result = {
        "parameter": res.parameter,
        "metric": res.metric,
        "protocol": res.protocol,
        "fixed": res.fixed,
        "points": points,
    }
    rows = [(f"{s:.17g}", f"{v:.17g}", res.metric, "") for s, v in zip(res.strengths, res.values)]
    summary = (
        f"sweep: {res.metric} at {len(points)} values of {res.parameter} "
        f"in [{res.strengths.min():.6g}, {res.strengths.max():.6g}]"
    )
    return _ModeOutcome(
        result=result,
        summary=summary,
        csv_header=("param", "value", "metric", "stderr"),
        csv_rows=rows,
    )


def _run_sample(cfg: dict, seed, workers) -> _ModeOutcome:
    if seed is None:
        raise ValidationError("sample mode requires a seed (config key 'seed' or --seed)")
    name = _string(cfg, "protocol", ("classical", "quantum"))
    n = _integer(cfg, "n", minimum=1)
    trace = _flag(cfg, "trace")
    if name == "classical":
        params = ClassicalParams(
            p1=_number(cfg, "p1"), g=_number(cfg, "g"), q=_number(cfg, "q"), q0=_number(cfg, "q0")
        )
        exact = joint_distribution(params)
        cv = ContextualValues.symmetric(params.g)
        records = sample_classical_trace(params, n, seed) if trace else None
        counts = CountTable.from_records(records) if trace else sample_classical(params, n, seed)
    else:
        lam = _number(cfg, "lambda")
        if lam == 0.0:
            raise DomainError("conditional mean undefined at zero coupling (lam = 0)")
        i = TwoLevelState.from_occupation(_number(cfg, "p1"))
        f = _postselection_state(_number(cfg, "theta"))
        model = MeasurementModel(lam)
        exact = joint_outcome_probs(i, model, f)
        cv = ContextualValues.symmetric(lam)
        records = sample_quantum_trace(i, model, f, n, seed) if trace else None
        counts = CountTable.from_records(records) if trace else sample_quantum(i, model, f, n, seed)
    mean, stderr = estimate_conditional_mean(counts, cv, 2)
    exact_mean = conditional_mean(exact, cv, 2)
    try:
        gof = gof_test(counts, exact)
        gof_doc = {"statistic": gof.statistic, "reject": gof.reject}
    except ValidationError:
        gof_doc = None
    result = {
        "protocol": name,
        "n": n,
        "seed": seed,
        "trace": trace,
        "counts": counts.counts.tolist(),
        "conditional_mean": mean,
        "stderr": stderr,
        "exact_conditional_mean": exact_mean,
        "gof": gof_doc,
    }
    rows = None
    header = None
    if trace:
        header = ("trial", "signal", "final_box")
        rows = [(str(k), rec.signal, str(rec.final_box)) for k, rec in enumerate(records)]
    summary = (
        f"sample: n = {n}, conditional mean {mean:.6g} +/- {stderr:.2g} "
        f"(exact {exact_mean:.6g})"
    )
    return _ModeOutcome(result=result, summary=summary, csv_header=header, csv_rows=rows)


_RUNNERS = {
    "classical": _run_classical,
    "quantum": _run_quantum,
    "match": _run_match,
    "witness": _run_witness,
    "sweep": _run_sweep,
    "sample": _run_sample,
}


def _walk_finite(node, path: str) -> None:
    if isinstance(node, bool) or node is None or isinstance(node, str):
        return
    if isinstance(node, (int, float)):
        if not math.isfinite(node):
            raise ValidationError(f"result contains a non-finite number at {path}")
        return
    if isinstance(node, dict):
        for key, value in node.items():
            if not isinstance(key, str):
                raise ValidationError(f"non-string key {key!r} at {path}")
            _walk_finite(value, f"{path}.{key}")
        return
    if isinstance(node, list):
        for idx, value in enumerate(node):
            _walk_finite(value, f"{path}[{idx}]")
        return
    raise ValidationError(f"unserializable value {node!r} at {path}")


def validate_result_document(doc: dict) -> None:
    """Check a result document against the schema the runner promises.

    Top level: exactly the keys ``mode``, ``result``, ``provenance``.
    Provenance: exactly ``engine`` (string), ``config`` (object), ``seed``
    (integer or null). Every number anywhere must be finite.
    """
    if not isinstance(doc, dict) or set(doc) != {"mode", "result", "provenance"}:
        raise ValidationError("result document must have exactly the keys mode, result, provenance")
    if doc["mode"] not in MODES:
        raise ValidationError(f"unknown mode {doc['mode']!r} in result document")
    if not isinstance(doc["result"], dict):
        raise ValidationError("result section must be an object")
    prov = doc["provenance"]
    if not isinstance(prov, dict) or set(prov) != {"engine", "config", "seed"}:
        raise ValidationError("provenance must have exactly the keys engine, config, seed")
    if not isinstance(prov["engine"], str) or not prov["engine"]:
        raise ValidationError("provenance.engine must be a nonempty string")
    if not isinstance(prov["config"], dict):
        raise ValidationError("provenance.config must be an object")
    seed = prov["seed"]
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ValidationError("provenance.seed must be an integer or null")
    _walk_finite(doc["result"], "result")


def _json_text(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_text(header: tuple, rows: list) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _write_atomic(path: str, text: str) -> None:
    """Write the full text to a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".twobox-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _workers_from_env() -> int | None:
    raw = os.environ.get("TWOBOX_WORKERS")
    if raw is None or raw == "":
        return None
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        raise ValidationError(f"TWOBOX_WORKERS must be a positive integer, got {raw!r}")
    return workers


def _resolve_seed(config: dict, flag_seed) -> int | None:
    seed = flag_seed if flag_seed is not None else config.get("seed")
    if seed is None:
        return None
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < (1 << 64):
        raise ValidationError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return seed


def run(config: dict, seed=None, out=None, fmt=None, quiet: bool = False) -> int:
    """Execute one config and write its result document. Returns the exit code 0.

    Raises ValidationError or DomainError instead of returning nonzero;
    :func:`main` maps those to exit codes 2 and 3.
    """
    if not isinstance(config, dict):
        raise ValidationError(f"config must be a JSON object, got {type(config).__name__}")
    mode = config.get("mode")
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; choose from {list(MODES)}")
    resolved_seed = _resolve_seed(config, seed)
    fmt = fmt if fmt is not None else config.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ValidationError(f"format must be 'json' or 'csv', got {fmt!r}")
    out = out if out is not None else config.get("out")
    if out is not None and (not isinstance(out, str) or not out):
        raise ValidationError(f"output path must be a nonempty string, got {out!r}")
    workers = _workers_from_env()

    outcome = _RUNNERS[mode](config, resolved_seed, workers)
    document = {
        "mode": mode,
        "result": outcome.result,
        "provenance": {
            "engine": f"twobox {__version__}",
            "config": config,
            "seed": resolved_seed,
        },
    }
    validate_result_document(document)
    if fmt == "json":
        text = _json_text(document)
    else:
        if outcome.csv_rows is None:
            raise ValidationError(
                f"csv output is not available for mode {mode!r}; "
                "it applies to sweeps and trial traces"
            )
        text = _csv_text(outcome.csv_header, outcome.csv_rows)

    if out is not None:
        try:
            _write_atomic(out, text)
        except OSError as err:
            raise ValidationError(f"cannot write output file {out!r}: {err}") from err
        if not quiet:
            print(outcome.summary)
    else:
        sys.stdout.write(text)
        if not quiet:
            print(outcome.summary, file=sys.stderr)
    return 0


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read config file {path!r}: {err}") from err
    except json.JSONDecodeError as err:
        raise ValidationError(f"config file {path!r} is not valid JSON: {err}") from err
    if not isinstance(config, dict):
        raise ValidationError(f"config file {path!r} must contain a JSON object")
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twobox",
        description="Evaluate two-box conditioned-measurement protocols from a JSON config.",
    )
    parser.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, metavar="PATH", help="output file (default stdout)")
    parser.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)
    parser.add_argument("--quiet", action="store_true", help="suppress the one-line summary")
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return run(config, seed=args.seed, out=args.out, fmt=args.fmt, quiet=args.quiet)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except TwoBoxError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
