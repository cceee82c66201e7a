"""Command-line front end: config ingestion, subcommands, CSV/JSON emission.

Subcommands: ``spectrum`` (sweep + envelope CSVs), ``zeta`` (one value as
JSON), ``tapestry`` (pole-lattice table as JSON), ``count`` (explicit-vs-
direct counting CSV), ``verify`` (self-check report, exit 1 on failure).
File-writing commands record a run manifest next to their outputs; CSV
bodies are byte-deterministic, so only the manifest carries a timestamp.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .dimensions import (
    build_tapestry,
    closed_form_sequence,
    counting_direct,
    counting_explicit,
    sample_off_jump_xs,
)
from .ifs_core import (
    AtomicMeasureSpec,
    ConfigError,
    FractalStringSpec,
    WeightedIFS,
    parse_system,
)
from .regularity import (
    AmbiguousRegularityError,
    FractionKey,
    OnePlusLogKey,
    RegularityKey,
    VectorKey,
    set_precision_ladder,
)
from .spectra import concave_envelope, spectrum_sweep
from .verify import default_threads, report_json, run_suite
from .zeta import (
    DivergenceError,
    HypothesisViolationError,
    closed_form_zeta,
    eval_series,
    multinomial_zeta,
)


# ---------------------------------------------------------------------------
# Run manifests and deterministic emission
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    """Record of one file-writing run; every output file is listed."""

    command: str
    config_path: str
    parameters: dict
    tool_version: str
    timestamp: str
    output_paths: tuple[str, ...]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _write_manifest(out: Path, command: str, config: str, params: dict,
                    outputs: list[Path]) -> Path:
    manifest_path = out.with_suffix(".manifest.json")
    manifest = RunManifest(
        command=command,
        config_path=config,
        parameters=params,
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        output_paths=tuple(str(p) for p in outputs),
    )
    manifest_path.write_text(manifest.to_json())
    return manifest_path


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows, manifest_path: Path) -> None:
    """Header + rows + trailing manifest reference; body is byte-deterministic
    (the comment names the manifest file, never its timestamped content)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    buf.write(f"# manifest: {manifest_path.name}\n")
    path.write_text(buf.getvalue())


def _print_json(payload, out: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def _load_system(args):
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<config>", f"cannot read {path}: {exc.strerror}") from exc
    return parse_system(text)


def parse_alpha_key(text: str) -> RegularityKey:
    """Accept ``k1,k2,...`` (exponent vector), ``p/q`` or an integer
    (regularity fraction), or ``1+log:LEVEL`` (half-weight leftmost cells)."""
    t = text.strip()
    if t.startswith("1+log:"):
        return OnePlusLogKey(level=int(t[len("1+log:"):]))
    body = t[1:-1] if t.startswith("(") and t.endswith(")") else t
    if "," in body:
        return VectorKey(tuple(int(x) for x in body.split(",")))
    try:
        return FractionKey(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("--alpha", f"malformed key {text!r}") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    set_precision_ladder(args.precision_bits)
    system = _load_system(args)
    if isinstance(system, FractalStringSpec):
        raise ConfigError("type", "spectrum sweeps apply to ifs and atomic systems")
    points = spectrum_sweep(system, K_max=args.kmax)
    out = Path(args.out)
    envelope_path = out.with_suffix(".envelope.csv")
    outputs = [out] if len(points) < 2 else [out, envelope_path]
    manifest_path = _write_manifest(
        out, "spectrum", args.config,
        {"kmax": args.kmax, "precision_bits": args.precision_bits}, outputs,
    )
    _write_csv(
        out,
        ["alpha", "f", "key", "alpha_desc", "f_desc"],
        ((p.alpha, p.f, str(p.key), p.alpha_desc, p.f_desc) for p in points),
        manifest_path,
    )
    if len(points) < 2:
        p = points[0]
        print(
            f"warning: monofractal system: the spectrum degenerates to the "
            f"single point (D, D) = ({p.alpha!r}, {p.f!r}); no envelope written",
            file=sys.stderr,
        )
        print(f"spectrum: 1 point -> {out}")
        return 0
    envelope = concave_envelope(points)
    _write_csv(
        envelope_path,
        ["alpha", "f"],
        envelope.breakpoints,
        manifest_path,
    )
    print(
        f"spectrum: {len(points)} points -> {out}; "
        f"envelope: {len(envelope.breakpoints)} vertices -> {envelope_path}"
    )
    return 0


def cmd_zeta(args) -> int:
    set_precision_ladder(args.precision_bits)
    system = _load_system(args)
    try:
        s = complex(args.s)
    except ValueError:
        raise ConfigError("--s", f"malformed complex number {args.s!r}")
    key = parse_alpha_key(args.alpha) if args.alpha is not None else None

    if isinstance(system, WeightedIFS):
        if not isinstance(key, VectorKey):
            raise ConfigError(
                "--alpha", "ifs systems need an exponent-vector key, e.g. --alpha 2,1"
            )
        zeta = multinomial_zeta(system, key.vector)
        sv = eval_series(zeta, s, tail_tol=args.tol, max_terms=args.terms)
        payload = {
            "mode": "series",
            "label": zeta.label,
            "value_re": sv.value.real,
            "value_im": sv.value.imag,
            "tail_bound": sv.tail_bound,
            "terms": sv.terms,
        }
    else:
        if isinstance(system, FractalStringSpec) and key is not None:
            raise ConfigError("--alpha", "string zetas take no class key")
        rz = closed_form_zeta(system, key)
        z = rz.z_of(s)
        den = rz.den(z)
        if abs(den) < 1e-15:
            raise ConfigError("--s", f"s = {args.s} is a pole of the closed form")
        value = rz.num(z) / den
        exact = None
        if s.imag == 0 and s.real == int(s.real):
            zq = rz.base ** int(s.real)
            exact_den = rz.den(zq)
            if exact_den != 0:
                exact_value = rz.num(zq) / exact_den
                exact = str(exact_value)
                value = complex(exact_value)
        payload = {
            "mode": "rational",
            "label": rz.label,
            "value_re": value.real,
            "value_im": value.imag,
            "exact": exact,
        }
    _print_json(payload, Path(args.out) if args.out else None)
    return 0


def cmd_tapestry(args) -> int:
    system = _load_system(args)
    if not isinstance(system, AtomicMeasureSpec):
        raise ConfigError("type", "tapestries are built for the atomic families")
    tapestry = build_tapestry(system, K_max=args.kmax, band=args.band)
    rows = []
    for alpha, lat in tapestry.pairs:
        rows.append(
            {
                "alpha": float(alpha),
                "real_part": lat.real_part,
                "period": lat.period,
                "shift": lat.phase_shift,
                "residue_re": lat.residue.real + 0.0,
                "residue_im": lat.residue.imag + 0.0,
            }
        )
    _print_json(rows, Path(args.out) if args.out else None)
    return 0


def cmd_count(args) -> int:
    system = _load_system(args)
    if isinstance(system, WeightedIFS):
        raise ConfigError("type", "counting tables exist for string and atomic systems")
    key = parse_alpha_key(args.alpha) if args.alpha is not None else None
    if isinstance(system, AtomicMeasureSpec) and key is None:
        raise ConfigError("--alpha", "atomic families need a class key, e.g. --alpha 1/2")
    rz = closed_form_zeta(system, key)
    if args.x:
        xs = list(args.x)
    else:
        xs = sample_off_jump_xs(
            rz, count=args.samples, lo=args.xmin, hi=args.xmax,
            guard=args.jump_guard, seed=args.seed,
        )
    seq = closed_form_sequence(system, key)
    rows = []
    for x in xs:
        result = counting_explicit(
            system, key, x, Z=args.trunc, jump_guard=args.jump_guard
        )
        rows.append(
            (result.x, result.direct, result.explicit_value,
             result.explicit_value - result.direct)
        )
    out = Path(args.out)
    manifest_path = _write_manifest(
        out, "count", args.config,
        {
            "alpha": args.alpha, "trunc": args.trunc, "jump_guard": args.jump_guard,
            "samples": len(xs), "xmin": args.xmin, "xmax": args.xmax, "seed": args.seed,
        },
        [out],
    )
    _write_csv(out, ["x", "direct", "explicit", "error"], rows, manifest_path)
    worst = max(abs(r[3]) for r in rows)
    print(f"count: {len(rows)} rows -> {out}; max |explicit - direct| = {worst:.3g}")
    return 0


def cmd_verify(args) -> int:
    budget = None
    if args.budget:
        budget = {}
        for part in args.budget.split(","):
            name, _, value = part.partition("=")
            if not value:
                raise ConfigError("--budget", f"expected NAME=INT, got {part!r}")
            try:
                budget[name.strip()] = int(value)
            except ValueError:
                raise ConfigError("--budget", f"expected NAME=INT, got {part!r}")
    threads = args.threads if args.threads is not None else default_threads()
    results = run_suite(args.suite, threads=threads, budget=budget)
    report = report_json(results)
    if args.out:
        Path(args.out).write_text(report)
    else:
        sys.stdout.write(report)
    return 0 if all(r.ok for r in results) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfzeta",
        description="Multifractal spectra and complex dimensions of "
        "self-similar measures via partition zeta functions.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="path to a JSON system config")

    spectrum = sub.add_parser(
        "spectrum", help="sweep the multifractal spectrum and its concave envelope"
    )
    add_config(spectrum)
    spectrum.add_argument("--kmax", type=int, default=64, help="stage-sum cap (default 64)")
    spectrum.add_argument(
        "--precision-bits", type=int, choices=(64, 256, 1024), default=64,
        help="first rung of the interval-precision ladder (default 64)",
    )
    spectrum.add_argument("--out", required=True, help="spectrum CSV path")
    spectrum.set_defaults(func=cmd_spectrum)

    zeta = sub.add_parser("zeta", help="evaluate one partition zeta function")
    add_config(zeta)
    zeta.add_argument(
        "--alpha", help="class key: k1,k2,... or p/q or 1+log:LEVEL (see docs)"
    )
    zeta.add_argument("--s", required=True, help="evaluation point, e.g. 2 or 1+3j")
    zeta.add_argument(
        "--tol", type=float, default=1e-12, help="series tail bound (default 1e-12)"
    )
    zeta.add_argument(
        "--terms", type=int, default=100000, help="series term cap (default 100000)"
    )
    zeta.add_argument(
        "--precision-bits", type=int, choices=(64, 256, 1024), default=64,
        help="first rung of the interval-precision ladder (default 64)",
    )
    zeta.add_argument("--out", help="write the JSON here instead of stdout")
    zeta.set_defaults(func=cmd_zeta)

    tapestry = sub.add_parser(
        "tapestry", help="pole lattices of every class key up to --kmax"
    )
    add_config(tapestry)
    tapestry.add_argument("--kmax", type=int, default=64, help="key depth cap (default 64)")
    tapestry.add_argument(
        "--band", type=float, default=50.0, help="imaginary-part band (default 50)"
    )
    tapestry.add_argument("--out", help="write the JSON here instead of stdout")
    tapestry.set_defaults(func=cmd_tapestry)

    count = sub.add_parser(
        "count", help="explicit-formula vs direct counting table"
    )
    add_config(count)
    count.add_argument("--alpha", help="class key for atomic families, e.g. 1/2")
    count.add_argument(
        "--x", action="append", type=float,
        help="evaluate at this x (repeatable); default: sampled off-jump points",
    )
    count.add_argument("--samples", type=int, default=25, help="sample count (default 25)")
    count.add_argument("--xmin", type=float, default=2.0, help="sample range low (default 2)")
    count.add_argument("--xmax", type=float, default=1e6, help="sample range high (default 1e6)")
    count.add_argument("--seed", type=int, default=7, help="sampling seed (default 7)")
    count.add_argument(
        "--trunc", type=int, default=20000, help="pole-sum truncation Z (default 20000)"
    )
    count.add_argument(
        "--jump-guard", type=float, default=0.02,
        help="minimum log-distance from counting jumps (default 0.02)",
    )
    count.add_argument("--out", required=True, help="counting CSV path")
    count.set_defaults(func=cmd_count)

    verify = sub.add_parser("verify", help="run the self-check suites")
    verify.add_argument(
        "--suite", default="all", choices=("oracle", "zeta", "spectra", "counting", "all"),
    )
    verify.add_argument("--budget", help="work caps, e.g. K=10")
    verify.add_argument(
        "--threads", type=int,
        help="worker threads (default: MFZETA_THREADS or 1)",
    )
    verify.add_argument("--out", help="write the report here instead of stdout")
    verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ConfigError,
        AmbiguousRegularityError,
        DivergenceError,
        HypothesisViolationError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
