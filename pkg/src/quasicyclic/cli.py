"""
Command-line front end.

Verbs: ``synth``, ``qpca``, ``estimate``, ``resample``, ``figures``.

On-disk formats
---------------
Dataset
    ``<stem>.json`` manifest ``{m, n, s_hint, description, seed, payload}``
    next to ``<stem>.csv``: one row per vector, ``2n`` columns alternating
    real and imaginary parts, 17 significant digits (bit-exact round trip).
Result
    a directory with ``result.json`` ``{N, s, n, lambdas, coset_eigenvalues,
    phase_policy}``, ``component_<j>.csv`` (index, re, im, abs) and
    ``spectrum_<j>.csv`` (k, re, im, abs) for ``j = 1..k``.

Exit codes: 0 success, 1 usage error, 2 data-format error, 3 numerical failure.
"""

import argparse
import csv
import inspect
import json
import logging
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import estimate, pca, scenarios
from .qpca import PhasePolicy, QpcaConfig, ShiftOrthonormalityError, qpca
from .resample import ResampleSpec, resample_dataset
from .signal_core import Dataset, dft

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_NUMERIC = 0, 1, 2, 3

logger = logging.getLogger(__name__)

EX1_PAIRS = [(0.0, 1.0), (0.25, 0.75), (0.5, 0.5), (0.75, 0.25), (1.0, 0.0)]
EX2_PULSE_RATES = [5, 7, 9, 12, 15]


class UsageError(Exception):
    pass


class DataFormatError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------- datasets

def _stem(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".json", ".csv") else path


def write_dataset(path, data: Dataset, s_hint=None, description: str = "", seed=None) -> Path:
    """Write manifest and payload; returns the manifest path."""
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    payload = stem.with_suffix(".csv")
    inter = np.empty((data.m, 2 * data.n))
    inter[:, 0::2] = data.vectors.real
    inter[:, 1::2] = data.vectors.imag
    with open(payload, "w", newline="") as fh:
        for row in inter:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    manifest = {
        "m": data.m,
        "n": data.n,
        "s_hint": s_hint,
        "description": description,
        "seed": seed,
        "payload": payload.name,
    }
    manifest_path = stem.with_suffix(".json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def read_dataset(path):
    """Read a dataset; returns ``(Dataset, manifest)``.

    Raises :class:`DataFormatError` (with the payload line number where it
    applies) on any mismatch between manifest and payload.
    """
    stem = _stem(path)
    manifest_path = stem.with_suffix(".json")
    try:
        manifest = json.loads(manifest_path.read_text())
    except FileNotFoundError:
        raise DataFormatError(f"{manifest_path}: manifest not found") from None
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{manifest_path}: line {exc.lineno}: invalid JSON ({exc.msg})") from None
    try:
        m, n = int(manifest["m"]), int(manifest["n"])
    except (KeyError, TypeError, ValueError):
        raise DataFormatError(f"{manifest_path}: manifest needs integer fields m and n") from None
    payload = stem.parent / manifest.get("payload", stem.with_suffix(".csv").name)
    rows = []
    try:
        with open(payload, newline="") as fh:
            for lineno, fields in enumerate(csv.reader(fh), start=1):
                if not fields:
                    raise DataFormatError(f"{payload}: line {lineno}: empty row")
                if len(fields) != 2 * n:
                    raise DataFormatError(f"{payload}: line {lineno}: expected {2 * n} columns, found {len(fields)}")
                try:
                    rows.append([float(v) for v in fields])
                except ValueError:
                    raise DataFormatError(f"{payload}: line {lineno}: non-numeric value") from None
    except FileNotFoundError:
        raise DataFormatError(f"{payload}: payload not found") from None
    if len(rows) != m:
        raise DataFormatError(f"{payload}: line {len(rows) + 1}: expected {m} rows, found {len(rows)}")
    if m == 0:
        raise DataFormatError(f"{payload}: dataset is empty")
    arr = np.array(rows)
    vectors = np.empty((m, n), dtype=complex)
    vectors.real, vectors.imag = arr[:, 0::2], arr[:, 1::2]  # keeps signed zeros
    return Dataset(vectors), manifest


def _write_table(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, (str, int, np.integer)) else _fmt(v) for v in row])


def _complex_rows(index, values):
    return [(int(i), v.real, v.imag, abs(v)) for i, v in zip(index, values)]


def write_result(out_dir, result, policy) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "N": result.N,
        "s": result.s,
        "n": result.n,
        "lambdas": [float(v) for v in result.lambdas],
        "coset_eigenvalues": [[float(v) for v in row] for row in result.coset_eigenvalues],
        "phase_policy": PhasePolicy(policy).value,
    }
    (out / "result.json").write_text(json.dumps(doc, indent=2) + "\n")
    idx = np.arange(result.n)
    for j in range(result.k):
        _write_table(out / f"component_{j + 1}.csv", ["index", "re", "im", "abs"],
                     _complex_rows(idx, result.components[j]))
        _write_table(out / f"spectrum_{j + 1}.csv", ["k", "re", "im", "abs"],
                     _complex_rows(idx, result.spectra[j]))
    return out


# ---------------------------------------------------------------- commands

def _coerce(value: str, default):
    if isinstance(default, bool):
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise UsageError(f"expected a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        return float(value)
    except ValueError:
        raise UsageError(f"expected a number, got {value!r}") from None


def _parse_overrides(builder, extras):
    params = inspect.signature(builder).parameters
    out = {}
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not tok.startswith("--"):
            if "=" in tok:
                key, value = tok.split("=", 1)
                i += 1
            else:
                raise UsageError(f"unexpected argument {tok!r}")
        elif "=" in tok:
            key, value = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extras):
                raise UsageError(f"override {tok} needs a value")
            key, value = tok[2:], extras[i + 1]
            i += 2
        key = key.replace("-", "_")
        if key not in params or key == "seed":
            valid = ", ".join(p for p in params if p != "seed")
            raise UsageError(f"unknown override {key!r} (valid: {valid})")
        out[key] = _coerce(value, params[key].default)
    return out


def cmd_synth(args, extras) -> int:
    builder = scenarios.BUILDERS.get(args.scenario)
    if builder is None:
        raise UsageError(f"unknown scenario {args.scenario!r} (choose from {', '.join(scenarios.BUILDERS)})")
    sc = builder(seed=args.seed, **_parse_overrides(builder, extras))
    path = write_dataset(args.out, sc.data, sc.s_hint, sc.description, args.seed)
    print(f"wrote {sc.data.m} x {sc.data.n} dataset to {path}")
    return EXIT_OK


def cmd_qpca(args, extras) -> int:
    data, _ = read_dataset(args.input)
    if args.s > data.n:
        raise UsageError(f"--s {args.s} exceeds the vector length {data.n}")
    config = QpcaConfig(args.s, args.components, args.phase, args.tol, args.threads)
    result = qpca(data, config)
    write_result(args.out, result, config.phase_policy)
    print(f"N={result.N} s={result.s} n={result.n}")
    print("component  lambda")
    for j, lam in enumerate(result.lambdas, start=1):
        print(f"{j:9d}  {lam:.6f}")
    return EXIT_OK


def cmd_estimate(args, extras) -> int:
    data, _ = read_dataset(args.input)
    s_est, band = estimate.bandwidth_period_estimate(data)
    s_min = args.s_min if args.s_min is not None else 3
    s_max = args.s_max if args.s_max is not None else max(s_min, int(math.floor(2 * s_est)))
    s_max = min(s_max, data.n) if args.s_max is None else s_max
    if not 1 <= s_min <= s_max <= data.n:
        raise UsageError(f"invalid sweep range {s_min}..{s_max} for vectors of length {data.n}")
    rows, s_star = estimate.sweep_period(data, s_min, s_max, QpcaConfig(s_min, tol=args.tol, threads=args.threads))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_table(out, ["s", "lambda1", "lambda2", "ratio", "n_used"],
                 [(r.s, r.lambda1, r.lambda2, r.ratio, r.n_used) for r in rows])
    print(f"bandwidth estimate: s ~ {s_est:.3f} (occupied fraction {band:.4f})")
    print(f"s* = {s_star}")
    return EXIT_OK


def cmd_resample(args, extras) -> int:
    data, manifest = read_dataset(args.input)
    spec = ResampleSpec(args.s_old, args.s_new)
    if spec.output_length(data.n) == 0:
        raise UsageError("vectors are shorter than one symbol period at --s-old")
    out = resample_dataset(data, spec)
    desc = f"{manifest.get('description', '')} | resampled {args.s_old} -> {args.s_new}".strip(" |")
    path = write_dataset(args.out, out, args.s_new, desc, manifest.get("seed"))
    print(f"wrote {out.m} x {out.n} dataset to {path}")
    return EXIT_OK


# ---------------------------------------------------------------- figures

def _signed_freq(n: int, s: int) -> np.ndarray:
    # cycles per symbol period for DFT bin k
    return np.fft.fftfreq(n) * s


def _fig_intro(out: Path, args):
    sc = scenarios.intro(seed=args.seed)
    N, s = scenarios.INTRO_DEFAULTS["N"], scenarios.INTRO_DEFAULTS["s"]
    idx = np.arange(sc.data.n)
    _write_table(out / "fig1_pulse.csv", ["index", "pulse"], zip(idx, sc.truth.real))
    _write_table(out / "fig1_data.csv", ["index", "re", "im"],
                 zip(idx, sc.data.vectors[0].real, sc.data.vectors[0].imag))
    pcs = pca.components(sc.data, N).components
    _write_table(out / "fig1_pca.csv", ["index"] + [f"pc{j + 1}" for j in range(pcs.shape[0])],
                 [(i, *pcs[:, i].real) for i in idx])
    res = qpca(sc.data, QpcaConfig(s, 1, PhasePolicy.LEADING_REAL, args.tol, args.threads))
    shifts = np.stack([np.roll(res.components[0], j * s) for j in range(N)])
    _write_table(out / "fig1_qpca.csv", ["index"] + [f"shift{j}" for j in range(N)],
                 [(i, *shifts[:, i].real) for i in idx])
    return {
        "fig1_pulse.csv": "the length-54 shift-orthonormal pulse",
        "fig1_data.csv": "one example data vector",
        "fig1_pca.csv": "the six leading ordinary principal components (real parts)",
        "fig1_qpca.csv": "the first quasicyclic pulse and its 9-sample shifts (real parts)",
    }


def _fig_ex1(out: Path, args):
    N, s = scenarios.MIXTURE_DEFAULTS["N"], scenarios.MIXTURE_DEFAULTS["s"]
    n = N * s
    idx = np.arange(n)
    freq = _signed_freq(n, s)
    q1, q2, lams = [], [], []
    for p1, p2 in EX1_PAIRS:
        sc = scenarios.mixture(p1, p2, seed=args.seed)
        res = qpca(sc.data, QpcaConfig(s, 2, PhasePolicy.ZERO_PHASE, args.tol, args.threads))
        q1.append(np.abs(res.spectra[0]))
        q2.append(np.abs(res.spectra[1]) if res.k > 1 else np.zeros(n))
        lams.append((p1, p2, res.lambdas[0], res.lambdas[1] if res.k > 1 else 0.0))
    labels = [f"P{p1:g}_{p2:g}" for p1, p2 in EX1_PAIRS]
    order = np.argsort(freq, kind="stable")
    for name, series in (("fig2_q1_spectra.csv", q1), ("fig2_q2_spectra.csv", q2)):
        _write_table(out / name, ["k", "freq"] + labels, [(int(k), freq[k], *(c[k] for c in series)) for k in order])
    _write_table(out / "fig2_lambdas.csv", ["p1", "p2", "lambda1", "lambda2"], lams)
    return {
        "fig2_q1_spectra.csv": "|spectrum| of the first component for each (P1, P2), vs frequency in cycles/symbol",
        "fig2_q2_spectra.csv": "|spectrum| of the second component for each (P1, P2)",
        "fig2_lambdas.csv": "energy fractions of the two components for each (P1, P2)",
    }


def _fig_ex2(out: Path, args):
    sc = scenarios.sweep(seed=args.seed)
    config = QpcaConfig(3, tol=args.tol, threads=args.threads)
    rows, s_star = estimate.sweep_period(sc.data, 3, 18, config)
    _write_table(out / "fig3_ratio.csv", ["s", "lambda1", "lambda2", "ratio", "n_used"],
                 [(r.s, r.lambda1, r.lambda2, r.ratio, r.n_used) for r in rows])
    pulse_rows = []
    for s in EX2_PULSE_RATES:
        res = qpca(sc.data, QpcaConfig(s, 1, PhasePolicy.ZERO_PHASE, args.tol, args.threads))
        q = res.components[0]
        pulse_rows += [(s, i, i / s, abs(v)) for i, v in enumerate(q)]
    _write_table(out / "fig4_pulses.csv", ["s", "index", "time_symbols", "abs"], pulse_rows)
    return {
        "fig3_ratio.csv": f"lambda1/lambda2 against candidate s (peak at s={s_star})",
        "fig4_pulses.csv": "|q1| for several candidate s (long format, time in symbol periods)",
    }


def _fig_ex3(out: Path, args):
    sc = scenarios.fractional(seed=args.seed)
    s = 9
    direct = qpca(sc.data, QpcaConfig(s, 1, PhasePolicy.ZERO_PHASE, args.tol, args.threads))
    resampled = resample_dataset(sc.data, ResampleSpec(sc.s_hint, s))
    fixed = qpca(resampled, QpcaConfig(s, 1, PhasePolicy.ZERO_PHASE, args.tol, args.threads))
    rows = []
    for name, res in (("direct", direct), ("resampled", fixed)):
        q = res.components[0]
        rows += [(name, i, i / s, v.real, v.imag, abs(v)) for i, v in enumerate(q)]
    _write_table(out / "fig5_pulses.csv", ["variant", "index", "time_symbols", "re", "im", "abs"], rows)
    _write_table(out / "fig5_lambdas.csv", ["variant", "lambda1"],
                 [("direct", direct.lambdas[0]), ("resampled", fixed.lambdas[0])])
    return {
        "fig5_pulses.csv": "q1 from the 8.5-rate data taken at s=9 directly, and after resampling to s=9",
        "fig5_lambdas.csv": "energy fraction of q1 for both variants",
    }


FIGURES = {"intro": _fig_intro, "ex1": _fig_ex1, "ex2": _fig_ex2, "ex3": _fig_ex3}


def cmd_figures(args, extras) -> int:
    builder = FIGURES.get(args.scenario)
    if builder is None:
        raise UsageError(f"unknown figure set {args.scenario!r} (choose from {', '.join(FIGURES)})")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"{out} is not writable")
    except OSError as exc:
        raise UsageError(f"cannot write to {out}: {exc}") from None
    mapping = builder(out, args)
    lines = [f"# Plot data: {args.scenario} (seed {args.seed})", "",
             "Plain CSV series; first row is a header.", ""]
    lines += [f"- `{name}`: {what}" for name, what in mapping.items()]
    (out / "README.md").write_text("\n".join(lines) + "\n")
    for name in mapping:
        print(out / name)
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Accepted before or after the verb; the verb-level copies use SUPPRESS
    # so they do not clobber values given before the verb.
    defaults = dict(seed=0, threads=os.cpu_count() or 1, tol=1e-9)
    if suppress:
        defaults = dict.fromkeys(defaults, argparse.SUPPRESS)
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=defaults["seed"], help="64-bit RNG seed (default 0)")
    g.add_argument("--threads", type=int, default=defaults["threads"],
                   help="worker threads for the coset solves (default: all cores)")
    g.add_argument("--tol", type=float, default=defaults["tol"], help="shift-orthonormality tolerance (default 1e-9)")
    return g


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasicyclic", description="Quasicyclic PCA toolkit", parents=[_global_flags(False)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_global_flags(True)]

    p = sub.add_parser("synth", parents=common, help="generate a reference dataset",
                       description="Generate a dataset. Scenario parameters are overridden with --name value.")
    p.add_argument("scenario", help=", ".join(scenarios.BUILDERS))
    p.add_argument("--out", required=True, help="output stem (writes <stem>.json and <stem>.csv)")
    p.set_defaults(func=cmd_synth, accepts_extras=True)

    p = sub.add_parser("qpca", parents=common, help="run QPCA on a dataset")
    p.add_argument("input")
    p.add_argument("--s", type=int, required=True, help="samples per symbol")
    p.add_argument("--components", type=int, default=1)
    p.add_argument("--phase", choices=[pp.value for pp in PhasePolicy], default=PhasePolicy.LEADING_REAL.value)
    p.add_argument("--out", required=True, help="result directory")
    p.set_defaults(func=cmd_qpca)

    p = sub.add_parser("estimate", parents=common, help="sweep candidate symbol periods")
    p.add_argument("input")
    p.add_argument("--s-min", type=int, default=None, help="default 3")
    p.add_argument("--s-max", type=int, default=None, help="default 2x the bandwidth-based estimate")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("resample", parents=common, help="sinc-resample to an integer rate")
    p.add_argument("input")
    p.add_argument("--s-old", type=float, required=True)
    p.add_argument("--s-new", type=int, required=True)
    p.add_argument("--out", required=True, help="output stem")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("figures", parents=common, help="write plot-ready CSV series")
    p.add_argument("scenario", help=", ".join(FIGURES))
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    if extras and not getattr(args, "accepts_extras", False):
        parser.error(f"unrecognized arguments: {' '.join(extras)}")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    if not args.seed >= 0 or args.seed >= 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    try:
        return args.func(args, extras)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFormatError as exc:
        print(f"data format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (pca.DegenerateDataError, ShiftOrthonormalityError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
