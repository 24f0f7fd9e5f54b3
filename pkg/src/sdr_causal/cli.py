"""Command-line interface.

Subcommands: ``infer``, ``simulate``, ``experiment``, ``psd``, ``whiten``
(``fit`` / ``apply``) and ``decimate``. Exit codes: 0 success, 1 usage or
I/O error, 2 numerical degeneracy (degenerate spectrum, too-short series,
grid mismatch).
"""

import argparse
import csv
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .exceptions import ConfigError, SDRError
from .filters import CoefficientSampler
from .gen_model import CauseSpec, generate_pair
from .harness import ExperimentConfig, run_experiment, summary_line
from .invariance import Whitener, apply_whitener, fit_whitener, whiten_series
from .resampling import DEFAULT_TRIM_FRACTION, lowpass_decimate
from .sdr import effect_spectrum, report_from_spectra
from .spectral import DEFAULT_FLOOR_REL, Spectrum, WelchConfig, estimate_psd_welch

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------- I/O

def read_csv_columns(path):
    """Read numeric columns from a CSV file.

    Lines starting with ``#`` and blank lines are skipped. The first
    remaining line is a header if any of its cells is non-numeric.
    Returns ``(header or None, list of 1-D arrays)``.
    """
    try:
        with open(path, newline="") as fh:
            lines = list(enumerate(fh, start=1))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    records = []
    for lineno, line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        records.append((lineno, next(csv.reader([stripped]))))
    if not records:
        raise UsageError(f"{path}: no data rows")
    header = None
    first_no, first = records[0]
    if not all(_is_number(c) for c in first):
        header = [c.strip() for c in first]
        records = records[1:]
        if not records:
            raise UsageError(f"{path}: header but no data rows")
    width = len(header) if header else len(records[0][1])
    data = np.empty((len(records), width))
    for i, (lineno, cells) in enumerate(records):
        if len(cells) != width:
            raise UsageError(f"{path}, line {lineno}: expected {width} columns, found {len(cells)}")
        for j, cell in enumerate(cells):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise UsageError(
                    f"{path}, line {lineno}, column {j + 1}: non-numeric value {cell.strip()!r}"
                ) from None
            if not np.isfinite(data[i, j]):
                raise UsageError(f"{path}, line {lineno}, column {j + 1}: non-finite value")
    return header, [data[:, j].copy() for j in range(width)]


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def columns_csv(header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def spectrum_csv(S):
    return columns_csv(["nu", "value"], [S.grid.frequencies, S.values])


def read_spectrum_csv(path):
    header, cols = read_csv_columns(path)
    if len(cols) == 2:
        return Spectrum(cols[1])
    if len(cols) == 1:
        return Spectrum(cols[0])
    raise UsageError(f"{path}: expected columns (nu, value), found {len(cols)} columns")


# ----------------------------------------------------------------- helpers

def _add_welch(p):
    p.add_argument("--segment-length", type=int, default=1024)
    p.add_argument("--overlap", type=float, default=0.5, help="overlap fraction in [0, 1)")
    p.add_argument("--window", choices=("hann", "rectangular"), default="hann")


def _welch(args):
    return WelchConfig(args.segment_length, args.overlap, args.window)


def _load_pair(paths):
    if len(paths) == 1:
        _, cols = read_csv_columns(paths[0])
        if len(cols) < 2:
            raise UsageError(f"{paths[0]}: need two columns (x, y), found {len(cols)}")
        return cols[0], cols[1]
    if len(paths) == 2:
        return read_csv_columns(paths[0])[1][0], read_csv_columns(paths[1])[1][0]
    raise UsageError("infer takes one two-column file or two single-column files")


# ---------------------------------------------------------------- commands

def cmd_infer(args):
    x, y = _load_pair(args.inputs)
    welch = _welch(args)
    S_xx = estimate_psd_welch(x, welch)
    S_yy = estimate_psd_welch(y, welch)
    if args.whiten:
        if args.whiten == "fit":
            wh = fit_whitener([S_xx, S_yy], args.floor_rel)
        else:
            wh = Whitener.from_json(read_json(args.whiten))
        S_xx, S_yy = apply_whitener(wh, S_xx), apply_whitener(wh, S_yy)
    report = report_from_spectra(S_xx, S_yy, args.floor_rel, args.tie_tolerance)
    print(f"decision: {report.decision.value}")
    print(f"rho_forward: {report.rho_forward:.6g}")
    print(f"rho_backward: {report.rho_backward:.6g}")
    if args.out:
        out = report.to_json()
        out["welch"] = welch.to_json()
        out["floor_rel"] = args.floor_rel
        out["whitened"] = bool(args.whiten)
        write_json(args.out, out)
    return EXIT_OK


def cmd_simulate(args):
    cause = CauseSpec.parse(args.cause)
    sampler = CoefficientSampler.from_label(args.sampler)
    pair = generate_pair(cause, args.m, sampler, args.n, args.seed, args.grid)
    S_xx = pair.true_Sxx
    S_yy = effect_spectrum(S_xx, pair.true_filter)
    report = report_from_spectra(S_xx, S_yy, args.floor_rel)
    atomic_write(args.out, pair.to_csv())
    if args.truth:
        write_json(args.truth, {
            "cause": cause.label(),
            "sampler": sampler.label,
            "m": args.m,
            "n": args.n,
            "seed": args.seed,
            "grid": S_xx.M,
            "filter": pair.true_filter.to_json(),
            "rho_fwd": report.rho_forward,
            "rho_bwd": report.rho_backward,
            "direction": "XtoY",
        })
    print(f"wrote {args.n} samples to {args.out}; analytic rho_fwd={report.rho_forward:.6g} "
          f"rho_bwd={report.rho_backward:.6g}")
    return EXIT_OK


_EXPERIMENT_KEYS = {
    "experiment": str,
    "m_values": "ints",
    "trials": int,
    "cause": str,
    "sampler": str,
    "n": int,
    "d_values": "ints",
    "seed": int,
    "segment_length": int,
    "overlap": float,
    "window": str,
    "floor_rel": float,
    "grid_size": int,
    "repetitions": int,
    "exponent_spread": float,
    "trim_fraction": float,
    "confidence": float,
}


def _convert(key, raw):
    kind = _EXPERIMENT_KEYS[key]
    try:
        if kind == "ints":
            if isinstance(raw, (list, tuple)):
                return [int(v) for v in raw]
            return [int(v) for v in str(raw).replace(" ", "").split(",") if v]
        return kind(raw)
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None


def read_config_file(path):
    """Parse ``key = value`` lines; keys mirror the long flag names."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise ConfigError(f"{path}, line {lineno}: expected 'key = value'")
        key = key.strip().lstrip("-").replace("-", "_")
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"{path}, line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, value.strip())
    return out


def experiment_config(args):
    """Merge flags over the config file over defaults."""
    merged = read_config_file(args.config) if args.config else {}
    for key in _EXPERIMENT_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = _convert(key, value)
    if "experiment" not in merged:
        raise ConfigError("experiment name missing (use --experiment or 'experiment =' in the config)")
    if "seed" not in merged:
        raise ConfigError("a seed is mandatory (use --seed or 'seed =' in the config)")
    welch = WelchConfig(merged.get("segment_length", 1024), merged.get("overlap", 0.5),
                        merged.get("window", "hann"))
    kwargs = {
        "experiment": merged["experiment"],
        "base_seed": merged["seed"],
        "welch": welch,
    }
    if "cause" in merged:
        kwargs["cause"] = CauseSpec.parse(merged["cause"])
    if "sampler" in merged:
        kwargs["sampler"] = CoefficientSampler.from_label(merged["sampler"])
    renames = {"m_values": "m_values", "trials": "trials", "n": "N", "d_values": "D_values",
               "floor_rel": "floor_rel", "grid_size": "grid_size", "repetitions": "repetitions",
               "exponent_spread": "exponent_spread", "trim_fraction": "trim_fraction",
               "confidence": "confidence"}
    for key, field_name in renames.items():
        if key in merged:
            kwargs[field_name] = merged[key]
    return ExperimentConfig(**kwargs)


def cmd_experiment(args):
    cfg = experiment_config(args)
    result = run_experiment(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    atomic_write(os.path.join(args.out_dir, "rows.csv"), result.rows_csv())
    write_json(os.path.join(args.out_dir, "summary.json"), result.summary_json())
    for group in result.summary:
        print(summary_line(group))
    return EXIT_OK


def cmd_psd(args):
    _, cols = read_csv_columns(args.input)
    if not 0 <= args.column < len(cols):
        raise UsageError(f"{args.input}: column {args.column} out of range (found {len(cols)})")
    S = estimate_psd_welch(cols[args.column], _welch(args))
    atomic_write(args.out, spectrum_csv(S))
    print(f"wrote {S.M}-bin spectrum to {args.out}; power={S.values.mean():.6g}")
    return EXIT_OK


def cmd_whiten_fit(args):
    welch = _welch(args)
    spectra = []
    for path in args.inputs:
        _, cols = read_csv_columns(path)
        spectra.extend(estimate_psd_welch(c, welch) for c in cols)
    wh = fit_whitener(spectra, args.floor_rel)
    write_json(args.out, wh.to_json())
    print(f"fitted whitener on {len(spectra)} series; grid={wh.M} gamma={wh.gamma:.6g}")
    return EXIT_OK


def cmd_whiten_apply(args):
    wh = Whitener.from_json(read_json(args.whitener))
    if args.spectrum:
        out = apply_whitener(wh, read_spectrum_csv(args.spectrum))
        atomic_write(args.out, spectrum_csv(out))
    else:
        header, cols = read_csv_columns(args.series)
        header = header or [f"c{j}" for j in range(len(cols))]
        atomic_write(args.out, columns_csv(header, [whiten_series(wh, c) for c in cols]))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_decimate(args):
    header, cols = read_csv_columns(args.input)
    header = header or [f"c{j}" for j in range(len(cols))]
    out = [lowpass_decimate(c, args.factor, args.trim) for c in cols]
    atomic_write(args.out, columns_csv(header, out))
    print(f"wrote {out[0].size} samples per column to {args.out}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser():
    parser = _Parser(prog="sdr-causal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("infer", help="infer causal direction of a pair of series")
    p.add_argument("inputs", nargs="+", help="one two-column CSV, or two single-column CSVs")
    _add_welch(p)
    p.add_argument("--floor-rel", type=float, default=DEFAULT_FLOOR_REL)
    p.add_argument("--tie-tolerance", type=float, default=1e-9)
    p.add_argument("--whiten", metavar="WHITENER.json|fit")
    p.add_argument("--out", metavar="REPORT.json")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("simulate", help="generate a cause/effect pair from the forward model")
    p.add_argument("--cause", default="ar1:0.9", help="e.g. white, ar1:0.9, ar2:0.5,-0.3, powerlaw:1,0.001")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sampler", default="spherical",
                   help="spherical, spherical-chi, normal, rademacher or uniform")
    p.add_argument("--n", type=int, default=2**16)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid", type=int, default=8192, help="bins of the analytic cause PSD")
    p.add_argument("--floor-rel", type=float, default=DEFAULT_FLOOR_REL)
    p.add_argument("--out", required=True, metavar="PAIR.csv")
    p.add_argument("--truth", metavar="TRUTH.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a Monte Carlo suite")
    p.add_argument("--config", metavar="FILE", help="key = value file mirroring the flags")
    p.add_argument("--experiment",
                   choices=("concentration", "identifiability", "fb_product", "decimation", "whitening"))
    p.add_argument("--m-values", dest="m_values", metavar="M1,M2,...")
    p.add_argument("--trials", type=int)
    p.add_argument("--cause")
    p.add_argument("--sampler")
    p.add_argument("--n", type=int)
    p.add_argument("--d-values", dest="d_values", metavar="D1,D2,...")
    p.add_argument("--seed", type=int)
    p.add_argument("--segment-length", type=int)
    p.add_argument("--overlap", type=float)
    p.add_argument("--window", choices=("hann", "rectangular"))
    p.add_argument("--floor-rel", type=float)
    p.add_argument("--grid-size", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--exponent-spread", type=float)
    p.add_argument("--trim-fraction", type=float)
    p.add_argument("--confidence", type=float)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("psd", help="Welch PSD of one column of a CSV file")
    p.add_argument("input")
    p.add_argument("--column", type=int, default=0)
    _add_welch(p)
    p.add_argument("--out", required=True, metavar="SPECTRUM.csv")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("whiten", help="fit or apply a dataset-wide whitener")
    wsub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    q = wsub.add_parser("fit", help="fit on every column of the given series files")
    q.add_argument("inputs", nargs="+")
    _add_welch(q)
    q.add_argument("--floor-rel", type=float, default=DEFAULT_FLOOR_REL)
    q.add_argument("--out", required=True, metavar="WHITENER.json")
    q.set_defaults(func=cmd_whiten_fit)
    q = wsub.add_parser("apply", help="whiten a spectrum CSV or the columns of a series CSV")
    q.add_argument("--whitener", required=True)
    group = q.add_mutually_exclusive_group(required=True)
    group.add_argument("--spectrum", metavar="SPECTRUM.csv")
    group.add_argument("--series", metavar="SERIES.csv")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_whiten_apply)

    p = sub.add_parser("decimate", help="ideal low-pass and decimate every column")
    p.add_argument("input")
    p.add_argument("--factor", type=int, required=True)
    p.add_argument("--trim", type=float, default=DEFAULT_TRIM_FRACTION)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decimate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SDRError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
