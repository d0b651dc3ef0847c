"""Command-line front end: sweeps, validation suites, sampling, cone angles.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
error.  All outputs are deterministic for a fixed configuration and seed:
no timestamps, stable float formatting, ordered rows.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass

from . import __version__
from .bound import (
    DEFAULT_VARIANCE_INTERPRETATION,
    BoundQuery,
    expected_bound,
    log_asymptotic_bound,
)
from .channel import (
    LinkBudget,
    RisChannelSpec,
    analytic_moments,
    export_samples,
    friis,
    gamma_fit,
    sample_a,
)
from .errors import (
    AccuracyError,
    ConvergenceError,
    OutOfRegimeError,
    RisBoundError,
    UnresolvedFormulaError,
    UsageError,
)
from .reference_na import NaQuery, na_error
from .spheregeom import solve_alpha1

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# Sweep defaults reproduce the reference wireless setup: receive power fixed
# at 0 dB, 2.4 GHz carrier, antenna gains 8, two 10 m hops, rate 1/2, four
# reflecting elements with shape factors (1, 0.5).
DEFAULTS = {
    "channel.nris": 4,
    "channel.k1": 1.0,
    "channel.k2": 0.5,
    "link.rx_power_db": 0.0,
    "link.gain_tx": 8.0,
    "link.gain_rx": 8.0,
    "link.wavelength": 0.125,
    "link.d1": 10.0,
    "link.d2": 10.0,
    "sweep.snr_db_start": 28.0,
    "sweep.snr_db_stop": 44.0,
    "sweep.snr_db_step": 1.0,
    "sweep.n_list": "64,128",
    "sweep.rate": 0.5,
    "sweep.methods": "closed_form,chebyshev",
    "sweep.include_na": 1,
    "sweep.include_asymptotic": 0,
    "sweep.quad_order": 0,
    "sweep.variance_interpretation": DEFAULT_VARIANCE_INTERPRETATION,
    "sweep.seed": 20240817,
}

CSV_COLUMNS = [
    "n",
    "rate",
    "snr_db",
    "alpha1_rad",
    "bound_closed",
    "bound_oracle",
    "asymptotic",
    "na_reference",
    "clamped_flags",
    "quad_order_used",
    "log10_bound_closed",
    "log10_bound_oracle",
    "log10_asymptotic",
    "log10_na_reference",
    "error",
]


@dataclass
class SweepSpec:
    """Resolved sweep configuration (dB in, everything else linear)."""

    snr_db_start: float
    snr_db_stop: float
    snr_db_step: float
    n_list: list[int]
    rate: float
    channel: RisChannelSpec
    link: LinkBudget
    methods: list[str]
    include_na: bool
    include_asymptotic: bool
    quad_order: int
    variance_interpretation: str
    seed: int
    output_path: str | None = None
    fmt: str = "csv"

    def snr_grid_db(self) -> list[float]:
        if self.snr_db_step <= 0:
            raise UsageError("snr step must be positive")
        if not self.n_list:
            raise UsageError("n_list must not be empty")
        count = int(math.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9)) + 1
        if count < 1:
            raise UsageError("empty snr grid")
        return [self.snr_db_start + i * self.snr_db_step for i in range(count)]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def received_snr(link: LinkBudget, transmit_snr_db: float) -> float:
    """Map the transmit-side snr (x axis) to the radius-normalized snr.

    The sphere radius scales with the received amplitude, so the bound sees
    the transmit snr attenuated by the free-space path gain.
    """
    return db_to_linear(transmit_snr_db) * link.path_gain


def variant_ledger() -> dict:
    """The resolved formula readings baked into this build (see
    docs/formula_notes.md for the numerical evidence)."""
    return {
        "moment_convention": "printed-product-formulas; sampler matched (unit diffuse power per hop)",
        "variance_interpretation_default": DEFAULT_VARIANCE_INTERPRETATION,
        "kummer_variant_default": "b32 (second Kummer parameter 3/2)",
        "closed_form_normalization": "b^(a+1)*Gamma(a+1)",
        "angular_prefactor": "(n-1) retained in the quadrature sum",
        "expected_q_term": "restored (deterministic quadrature)",
        "delta_second_branch": "amplitude-free nabla",
        "cap_recursion_base_odd": "1 - cos(alpha)",
    }


def variant_ledger_hash() -> str:
    blob = json.dumps(variant_ledger(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: str | None) -> dict:
    """Plain-text key = value pairs with dotted sections; '#' comments."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in cfg:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = val
    return cfg


def build_sweep_spec(cfg: dict, args: argparse.Namespace) -> SweepSpec:
    def pick(key, flag, cast):
        val = getattr(args, flag, None)
        return cast(val) if val is not None else cast(cfg[key])

    channel = RisChannelSpec(
        n_ris=pick("channel.nris", "nris", int),
        k_factor_1=pick("channel.k1", "k1", float),
        k_factor_2=pick("channel.k2", "k2", float),
    )
    link = friis(
        LinkBudget(
            gain_tx=float(cfg["link.gain_tx"]),
            gain_rx=float(cfg["link.gain_rx"]),
            wavelength=float(cfg["link.wavelength"]),
            d1=float(cfg["link.d1"]),
            d2=float(cfg["link.d2"]),
            rx_power=db_to_linear(float(cfg["link.rx_power_db"])),
        )
    )
    n_raw = getattr(args, "n", None)
    if n_raw is None:
        n_raw = str(cfg["sweep.n_list"])
    n_list = [int(tok) for tok in str(n_raw).replace(" ", "").split(",") if tok]
    if not n_list:
        raise UsageError("n_list must not be empty")
    methods_raw = getattr(args, "method", None)
    if methods_raw is None:
        methods_raw = str(cfg["sweep.methods"])
    methods = [tok for tok in str(methods_raw).replace(" ", "").split(",") if tok]
    snr_raw = getattr(args, "snr_db", None)
    if snr_raw:
        parts = [float(tok) for tok in snr_raw.replace(" ", "").split(":")]
        if len(parts) != 3:
            raise UsageError("--snr-db expects start:stop:step")
        start, stop, step = parts
    else:
        start = float(cfg["sweep.snr_db_start"])
        stop = float(cfg["sweep.snr_db_stop"])
        step = float(cfg["sweep.snr_db_step"])
    return SweepSpec(
        snr_db_start=start,
        snr_db_stop=stop,
        snr_db_step=step,
        n_list=n_list,
        rate=pick("sweep.rate", "rate", float),
        channel=channel,
        link=link,
        methods=methods,
        include_na=bool(int(cfg["sweep.include_na"])) if args.na is None else args.na,
        include_asymptotic=(
            bool(int(cfg["sweep.include_asymptotic"]))
            if args.asymptotic is None
            else args.asymptotic
        ),
        quad_order=pick("sweep.quad_order", "quad_order", int),
        variance_interpretation=str(cfg["sweep.variance_interpretation"]),
        seed=pick("sweep.seed", "seed", int),
        output_path=getattr(args, "out", None),
        fmt=getattr(args, "format", None) or "csv",
    )


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        raise AccuracyError(f"non-finite value reached the output boundary: {x}")
    return f"{x:.12g}"


def _log10_or_none(log_e: float | None):
    if log_e is None:
        return None
    return log_e / math.log(10.0)


def _evaluate_cell(spec: SweepSpec, n: int, cone, snr_db: float, moments) -> dict:
    """One (n, snr) cell; pure given its inputs, safe to run concurrently."""
    snr = received_snr(spec.link, snr_db)
    row = {
        "n": n,
        "rate": spec.rate,
        "snr_db": snr_db,
        "alpha1_rad": cone.alpha1,
        "bound_closed": None,
        "bound_oracle": None,
        "asymptotic": None,
        "na_reference": None,
        "clamped_flags": "",
        "quad_order_used": "",
        "error": "",
        "_failed": False,
    }
    want_closed = "closed_form" in spec.methods
    oracle_methods = [m for m in spec.methods if m != "closed_form"]
    oracle_method = oracle_methods[0] if oracle_methods else None
    flags = []
    try:
        if want_closed:
            q = BoundQuery(
                n=n, rate=spec.rate, snr=snr, method="closed_form",
                quad_order=spec.quad_order,
                variance_interpretation=spec.variance_interpretation,
            )
            try:
                cp = expected_bound(q, spec.channel)
                row["bound_closed"] = cp.expected_bound
                row["log10_bound_closed"] = _log10_or_none(cp.log_expected_bound)
                row["quad_order_used"] = cp.diagnostics.get("quad_order_used", "")
                if cp.diagnostics.get("clamped"):
                    flags.append("closed_clamped")
            except OutOfRegimeError:
                # intrinsic validity boundary of the closed form, not a
                # computation failure: marked, never fatal
                row["error"] = "closed_form_out_of_regime"
        if oracle_method:
            q = BoundQuery(
                n=n, rate=spec.rate, snr=snr, method=oracle_method,
                quad_order=spec.quad_order,
                variance_interpretation=spec.variance_interpretation,
            )
            cp = expected_bound(q, spec.channel)
            row["bound_oracle"] = cp.expected_bound
            row["log10_bound_oracle"] = _log10_or_none(cp.log_expected_bound)
            row["quad_order_used"] = cp.diagnostics.get(
                "quad_order_used", row["quad_order_used"]
            )
        if spec.include_asymptotic:
            try:
                q = BoundQuery(
                    n=n, rate=spec.rate, snr=snr, method="asymptotic",
                    variance_interpretation=spec.variance_interpretation,
                )
                lv = log_asymptotic_bound(q, moments, gamma_fit(moments))
                row["asymptotic"] = math.exp(min(0.0, lv))
                row["log10_asymptotic"] = _log10_or_none(min(0.0, lv))
            except OutOfRegimeError:
                row["error"] = (row["error"] + ";" if row["error"] else "") + \
                    "asymptotic_out_of_regime"
        if spec.include_na:
            nv = na_error(NaQuery(n=n, rate=spec.rate, snr=snr), spec.channel)
            row["na_reference"] = nv
            row["log10_na_reference"] = _log10_or_none(
                math.log(nv) if nv > 0 else None
            )
    except (ConvergenceError, AccuracyError, UnresolvedFormulaError) as exc:
        row["error"] = f"numerical:{type(exc).__name__}"
        row["_failed"] = True
    row["clamped_flags"] = "|".join(flags)
    return row


def run_sweep(spec: SweepSpec, workers: int | None = None) -> tuple[list[dict], dict, int]:
    """Evaluate every (n, snr) cell; returns (rows, metadata, exit_code).

    Cells are independent pure evaluations and run on a thread pool; rows
    are assembled in deterministic (n, snr) order regardless of scheduling.
    """
    import os
    from concurrent.futures import ThreadPoolExecutor

    moments = analytic_moments(spec.channel)
    grid = spec.snr_grid_db()
    cells = []
    for n in sorted(spec.n_list):
        cone = solve_alpha1(n, spec.rate)
        cells.extend((n, cone, snr_db) for snr_db in grid)
    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                lambda cell: _evaluate_cell(spec, cell[0], cell[1], cell[2], moments),
                cells,
            ))
    else:
        rows = [_evaluate_cell(spec, n, cone, snr_db, moments)
                for n, cone, snr_db in cells]
    failures = sum(1 for row in rows if row.pop("_failed"))
    meta = {
        "tool": "risbound",
        "version": __version__,
        "seed": spec.seed,
        "variant_ledger_sha256_16": variant_ledger_hash(),
        "rate": spec.rate,
        "n_list": sorted(spec.n_list),
        "snr_db": [spec.snr_db_start, spec.snr_db_stop, spec.snr_db_step],
        "nris": spec.channel.n_ris,
        "k_factors": [spec.channel.k_factor_1, spec.channel.k_factor_2],
        "path_gain_db": 10.0 * math.log10(spec.link.path_gain),
        "methods": spec.methods,
        "variance_interpretation": spec.variance_interpretation,
    }
    return rows, meta, (EXIT_NUMERICAL if failures else EXIT_OK)


def write_csv(rows: list[dict], meta: dict, stream) -> None:
    for key in sorted(meta):
        stream.write(f"# {key} = {json.dumps(meta[key], sort_keys=True)}\n")
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        cells = []
        for col in CSV_COLUMNS:
            val = row.get(col, "")
            if isinstance(val, float):
                cells.append(fmt_float(val))
            elif val is None:
                cells.append("")
            else:
                cells.append(str(val))
        stream.write(",".join(cells) + "\n")


def write_json(rows: list[dict], meta: dict, stream) -> None:
    payload = {"meta": meta, "rows": []}
    for row in rows:
        clean = {}
        for key, val in row.items():
            if isinstance(val, float) and (math.isnan(val) or math.isinf(val)):
                raise AccuracyError(f"non-finite value in JSON output: {key}")
            clean[key] = val
        payload["rows"].append(clean)
    json.dump(payload, stream, sort_keys=True, indent=1)
    stream.write("\n")


def emit(rows, meta, spec: SweepSpec) -> None:
    writer = write_csv if spec.fmt == "csv" else write_json
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8", newline="\n") as fh:
            writer(rows, meta, fh)
    else:
        writer(rows, meta, sys.stdout)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = build_sweep_spec(cfg, args)
    rows, meta, code = run_sweep(spec)
    emit(rows, meta, spec)
    return code


def cmd_alpha1(args) -> int:
    if args.n is None:
        raise UsageError("alpha1 requires --n")
    n_list = [int(tok) for tok in args.n.replace(" ", "").split(",") if tok]
    rate = args.rate if args.rate is not None else 0.5
    print("n,rate,alpha1_rad,residual")
    for n in n_list:
        cone = solve_alpha1(n, rate)
        print(f"{n},{fmt_float(rate)},{fmt_float(cone.alpha1)},{fmt_float(cone.residual)}")
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = RisChannelSpec(
        n_ris=args.nris if args.nris is not None else 4,
        k_factor_1=args.k1 if args.k1 is not None else 1.0,
        k_factor_2=args.k2 if args.k2 is not None else 0.5,
    )
    trials = args.trials if args.trials is not None else 100000
    seed = args.seed if args.seed is not None else int(DEFAULTS["sweep.seed"])
    est, samples = sample_a(spec, trials, seed, return_samples=True)
    if args.out:
        fmt = "npy" if args.out.endswith(".npy") else "csv"
        export_samples(args.out, samples, fmt=fmt)
    m = analytic_moments(spec)
    print(f"trials = {trials}")
    print(f"seed = {seed}")
    print(f"mc_mean = {fmt_float(est.mean)}")
    print(f"mc_std_error = {fmt_float(est.std_error)}")
    print(f"analytic_mean = {fmt_float(m.k1)}")
    print(f"analytic_var = {fmt_float(m.k2)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import run_validation

    level = args.level or "fast"
    seed = args.seed if args.seed is not None else int(DEFAULTS["sweep.seed"])
    report, ok = run_validation(level=level, seed=seed)
    out = sys.stdout
    if args.out:
        out = open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        out.write(report)
    finally:
        if args.out:
            out.close()
    return EXIT_OK if ok else EXIT_VALIDATION


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risbound",
        description="Sphere-packing error-probability lower bounds for a "
        "two-hop Rician fading channel behind a reflecting surface.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="evaluate bound curves over an SNR grid")
    sweep.add_argument("--n", help="comma-separated blocklengths")
    sweep.add_argument("--rate", type=float, help="bits per channel use")
    sweep.add_argument("--snr-db", dest="snr_db", help="transmit SNR grid start:stop:step (dB)")
    sweep.add_argument("--nris", type=int, help="number of reflecting elements")
    sweep.add_argument("--k1", type=float, help="first-hop shape factor")
    sweep.add_argument("--k2", type=float, help="second-hop shape factor")
    sweep.add_argument("--quad-order", dest="quad_order", type=int, help="angular nodes (0 = adaptive)")
    sweep.add_argument("--method", help="comma list: chebyshev,closed_form,exact_2d,collapsed_1d")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--na", action=argparse.BooleanOptionalAction, default=None,
                       help="include the normal-approximation reference column")
    sweep.add_argument("--asymptotic", action=argparse.BooleanOptionalAction, default=None)
    sweep.add_argument("--format", choices=("csv", "json"))
    sweep.add_argument("--out", help="output path (default stdout)")
    sweep.add_argument("--config", help="key = value config file")
    sweep.set_defaults(func=cmd_sweep)

    validate = sub.add_parser("validate", help="run the oracle-equivalence suites")
    validate.add_argument("--level", choices=("fast", "full"))
    validate.add_argument("--fast", dest="level", action="store_const", const="fast")
    validate.add_argument("--full", dest="level", action="store_const", const="full")
    validate.add_argument("--seed", type=int)
    validate.add_argument("--out")
    validate.set_defaults(func=cmd_validate)

    sample = sub.add_parser("sample", help="draw amplitude samples")
    sample.add_argument("--nris", type=int)
    sample.add_argument("--k1", type=float)
    sample.add_argument("--k2", type=float)
    sample.add_argument("--trials", type=int)
    sample.add_argument("--seed", type=int)
    sample.add_argument("--out", help=".csv or .npy sample dump")
    sample.set_defaults(func=cmd_sample)

    alpha1 = sub.add_parser("alpha1", help="solve the cone-angle equation")
    alpha1.add_argument("--n", help="comma-separated blocklengths")
    alpha1.add_argument("--rate", type=float)
    alpha1.set_defaults(func=cmd_alpha1)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, AccuracyError, OutOfRegimeError, UnresolvedFormulaError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RisBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
