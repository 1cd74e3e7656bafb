"""Command line interface: ``npsbayes estimate | samplesize | tables``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 sample-size search did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .alc import (
    DEFAULT_N_CAP,
    DEFAULT_POSTERIOR_DRAWS,
    DEFAULT_REPLICATIONS,
    AlcConfig,
    AlcEvaluator,
    SearchStrategy,
    min_sample_size,
)
from .errors import ConfigError, DataError, NonConvergenceError
from .hpd import DEFAULT_DRAWS, hpd_interval, sample_delta
from .ingest import PosteriorState, load_state, read_scores, save_state, tally_scores
from .model import (
    Counts,
    CredibleInterval,
    DirichletParams,
    moment_interval,
    posterior_mean,
    posterior_variance,
)
from .rvgen import DEFAULT_SEED, RngStream

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGENCE = 0, 2, 3, 4

PAPER_PRIORS = {
    "1": (1.0, 1.0, 1.0),
    "2": (5.0, 5.0, 5.0),
    "3": (2.0, 5.0, 8.0),
    "4": (8.0, 5.0, 2.0),
}
DEFAULT_LMAX_GRID = (0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18, 0.20)
DEFAULT_RHO_GRID = (0.01, 0.05, 0.10)
CHEAP_LMAX_MIN = 0.10


class UsageError(ConfigError):
    pass


def _triple(text, kind):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated values, got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as three {kind.__name__}s") from None


def _grid(text):
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse grid {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("grid is empty")
    return values


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# estimate


@dataclass
class CliReport:
    point_estimate: float
    mc_point_estimate: float
    posterior_sd: float
    moment_interval: CredibleInterval
    hpd: CredibleInterval
    prior: DirichletParams
    counts: Counts
    posterior: DirichletParams
    draws: int
    seed: int
    runtime_ms: int = 0
    label: str | None = None

    def to_dict(self, timing=False) -> dict:
        d = {
            "point_estimate": self.point_estimate,
            "mc_point_estimate": self.mc_point_estimate,
            "posterior_sd": self.posterior_sd,
            "moment_interval": self.moment_interval.to_dict(),
            "hpd": self.hpd.to_dict(),
            "prior": list(self.prior.as_tuple()),
            "counts": list(self.counts.as_tuple()),
            "label": self.label,
            "posterior": list(self.posterior.as_tuple()),
            "draws": self.draws,
            "seed": self.seed,
        }
        if timing:
            d["runtime_ms"] = self.runtime_ms
        return d

    def to_text(self) -> str:
        mi, h = self.moment_interval, self.hpd
        a = ", ".join(f"{v:g}" for v in self.posterior.as_tuple())
        lines = [
            f"posterior       Dir({a})   [counts {self.counts.as_tuple()}, n={self.counts.n}]",
            f"NPS estimate    {self.point_estimate:.5f}   (MC mean {self.mc_point_estimate:.5f}, "
            f"sd {self.posterior_sd:.5f})",
            f"{'interval':<16}{'lower':>9}{'upper':>9}{'length':>9}",
            f"{f'moment g={mi.level_or_gamma:g}':<16}{mi.lower:>9.4f}{mi.upper:>9.4f}{mi.length:>9.4f}"
            + ("   (clipped to [-1, 1])" if mi.clipped else ""),
            f"{f'HPD {h.level_or_gamma:.0%}':<16}{h.lower:>9.4f}{h.upper:>9.4f}{h.length:>9.4f}",
            f"draws {self.draws}, seed {self.seed}, {self.runtime_ms} ms",
        ]
        return "\n".join(lines) + "\n"


def estimate(
    prior: DirichletParams,
    counts: Counts,
    rho: float = 0.05,
    gamma: float = 1.96,
    draws: int = DEFAULT_DRAWS,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    label: str | None = None,
) -> CliReport:
    """Posterior update plus point and interval summaries for one batch."""
    start = time.perf_counter()
    post = DirichletParams(prior.a1 + counts.x1, prior.a2 + counts.x2, prior.a3 + counts.x3)
    sample = sample_delta(RngStream(seed), post, draws, threads=threads)
    hpd = hpd_interval(sample, rho)
    return CliReport(
        point_estimate=posterior_mean(post),
        mc_point_estimate=sample.mean(),
        posterior_sd=posterior_variance(post) ** 0.5,
        moment_interval=moment_interval(post, gamma),
        hpd=hpd,
        prior=prior,
        counts=counts,
        posterior=post,
        draws=draws,
        seed=seed,
        runtime_ms=round((time.perf_counter() - start) * 1000),
        label=label,
    )


def cmd_estimate(args, out) -> int:
    if args.counts is None and args.scores is None:
        raise UsageError("one of --counts or --scores is required")
    state_path = Path(args.state) if args.state else None
    if state_path is not None and state_path.exists():
        if args.prior is not None:
            raise UsageError(f"--prior conflicts with existing state file {state_path}")
        state = load_state(state_path)
    else:
        prior = DirichletParams.from_sequence(args.prior or (1.0, 1.0, 1.0))
        state = PosteriorState.fresh(prior)

    label = args.label
    if args.scores is not None:
        records = read_scores(args.scores)
        counts = tally_scores(records)
        labels = {r.label for r in records}
        if label is None and len(labels) == 1:
            label = labels.pop()
    else:
        counts = Counts(*args.counts)

    new_state = state.apply(counts, label)
    report = estimate(
        state.params, counts, args.rho, args.gamma, args.draws, args.seed, args.threads,
        label=new_state.history[-1].label,
    )
    if state_path is not None:
        save_state(new_state, state_path)
    out.write(_dump(report.to_dict(args.timing)) if args.json else report.to_text())
    return EXIT_OK


# ---------------------------------------------------------------------------
# samplesize


def _alc_config(args, l_max, rho) -> AlcConfig:
    return AlcConfig(
        l_max=l_max,
        rho=rho,
        L=args.L,
        N=args.N,
        seed=args.seed,
        strategy=SearchStrategy(args.strategy),
        n_cap=args.cap,
    )


def cmd_samplesize(args, out) -> int:
    prior = DirichletParams.from_sequence(args.prior)
    cfg = _alc_config(args, args.lmax, args.rho)
    start = time.perf_counter()
    result = min_sample_size(prior, cfg, threads=args.threads)
    runtime_ms = round((time.perf_counter() - start) * 1000)
    if args.json:
        d = result.to_dict()
        if args.timing:
            d["runtime_ms"] = runtime_ms
        out.write(_dump(d))
        return EXIT_OK
    out.write(f"minimum sample size n = {result.n_min}\n")
    out.write(
        f"average HPD length at n: {result.avg_length_at_n:.5f} (l_max {cfg.l_max:g}, "
        f"level {1 - cfg.rho:g}, L={cfg.L}, N={cfg.N}, seed={cfg.seed}, "
        f"strategy={cfg.strategy.value}, {runtime_ms} ms)\n"
    )
    out.write(f"{'n':>8}  avg_length\n")
    for n, avg in result.evaluations:
        out.write(f"{n:>8}  {avg:.5f}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables


def sample_size_table(prior, lmax_grid, rho_grid, make_cfg, threads=1):
    """``n_min`` for every ``(l_max, rho)`` cell; rows follow ``lmax_grid``."""
    cells = {}
    for rho in rho_grid:
        evaluator = None
        for l_max in lmax_grid:
            cfg = make_cfg(l_max, rho)
            if evaluator is None:
                evaluator = AlcEvaluator(prior, cfg, threads)
            cells[(l_max, rho)] = min_sample_size(prior, cfg, threads, evaluator).n_min
    return [[cells[(l, r)] for r in rho_grid] for l in lmax_grid]


def _format_table(prior, lmax_grid, rho_grid, grid, fmt):
    heads = [f"{r:g}" for r in rho_grid]
    if fmt == "csv":
        lines = ["l_max," + ",".join(f"rho={h}" for h in heads)]
        lines += [f"{l:.2f}," + ",".join(str(v) for v in row) for l, row in zip(lmax_grid, grid)]
        return "\n".join(lines) + "\n"
    a = ", ".join(f"{v:g}" for v in prior.as_tuple())
    lines = [
        f"ALC minimum sample size, prior Dir({a})",
        "",
        "| l_max | " + " | ".join(f"rho={h}" for h in heads) + " |",
        "|---:|" + "---:|" * len(heads),
    ]
    lines += [
        f"| {l:.2f} | " + " | ".join(str(v) for v in row) + " |" for l, row in zip(lmax_grid, grid)
    ]
    return "\n".join(lines) + "\n"


def cmd_tables(args, out) -> int:
    if args.full_tables:
        priors = [DirichletParams(*p) for p in PAPER_PRIORS.values()]
        lmax_grid = list(DEFAULT_LMAX_GRID)
    else:
        priors = [DirichletParams.from_sequence(args.prior)]
        lmax_grid = list(args.lmax_grid)
        if args.cheap:
            lmax_grid = [l for l in lmax_grid if l >= CHEAP_LMAX_MIN - 1e-12]
    rho_grid = list(args.rho_grid)
    if not lmax_grid:
        raise UsageError("l_max grid is empty")

    tables = []
    for prior in priors:
        grid = sample_size_table(
            prior, lmax_grid, rho_grid, lambda l, r: _alc_config(args, l, r), args.threads
        )
        tables.append((prior, grid))

    if args.json:
        base = _alc_config(args, lmax_grid[0], rho_grid[0]).to_dict()
        config = {k: v for k, v in base.items() if k not in ("l_max", "rho")}
        doc = {
            "config": config,
            "lmax_grid": lmax_grid,
            "rho_grid": rho_grid,
            "tables": [{"prior": list(p.as_tuple()), "n_min": g} for p, g in tables],
        }
        out.write(_dump(doc))
        return EXIT_OK
    text = "\n".join(_format_table(p, lmax_grid, rho_grid, g, args.format) for p, g in tables)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    p.add_argument("--threads", type=int, default=1, help="worker threads; output does not depend on it")
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")
    p.add_argument("--timing", action="store_true", help="include runtime_ms in JSON output")


def _add_alc(p):
    p.add_argument("--prior", type=lambda s: _triple(s, float), default=(1.0, 1.0, 1.0))
    p.add_argument("--L", type=int, default=DEFAULT_REPLICATIONS, help="predictive replications")
    p.add_argument("--N", type=int, default=DEFAULT_POSTERIOR_DRAWS, help="posterior draws per replication")
    p.add_argument("--strategy", choices=[s.value for s in SearchStrategy], default="bisect")
    p.add_argument("--cap", type=int, default=DEFAULT_N_CAP, help="largest n tried")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npsbayes", description="Bayesian NPS estimation and ALC sample-size determination."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="posterior point and interval estimates")
    src = est.add_mutually_exclusive_group()
    src.add_argument("--counts", type=lambda s: _triple(s, int), help="detractors,passives,promoters")
    src.add_argument("--scores", help="CSV file with a 'score' column (0-10)")
    est.add_argument("--prior", type=lambda s: _triple(s, float), default=None,
                     help="Dirichlet prior a1,a2,a3 (default 1,1,1)")
    est.add_argument("--rho", type=float, default=0.05, help="HPD level is 1 - rho")
    est.add_argument("--gamma", type=float, default=1.96, help="moment interval multiplier")
    est.add_argument("--draws", type=int, default=DEFAULT_DRAWS, help="posterior draws")
    est.add_argument("--state", help="JSON posterior state file, read then updated")
    est.add_argument("--label", help="label recorded for this batch in the state history")
    _add_common(est)
    est.set_defaults(func=cmd_estimate)

    ss = sub.add_parser("samplesize", help="minimum sample size by the average length criterion")
    ss.add_argument("--lmax", type=float, required=True, help="maximum average HPD length")
    ss.add_argument("--rho", type=float, default=0.05)
    _add_alc(ss)
    _add_common(ss)
    ss.set_defaults(func=cmd_samplesize)

    tb = sub.add_parser("tables", help="grid of minimum sample sizes over l_max and rho")
    _add_alc(tb)
    tb.add_argument("--lmax-grid", type=_grid, default=list(DEFAULT_LMAX_GRID))
    tb.add_argument("--rho-grid", type=_grid, default=list(DEFAULT_RHO_GRID))
    tb.add_argument("--cheap", action="store_true", help=f"only l_max >= {CHEAP_LMAX_MIN:.2f}")
    tb.add_argument("--full-tables", action="store_true",
                    help="all four reference priors over the full grid (slow)")
    tb.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    tb.add_argument("--output", help="write the table here instead of stdout")
    _add_common(tb)
    tb.set_defaults(func=cmd_tables)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "threads", 1) < 1:
        err.write("npsbayes: error: --threads must be >= 1\n")
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except NonConvergenceError as exc:
        err.write(f"npsbayes: {exc}\n")
        return EXIT_NONCONVERGENCE
    except DataError as exc:
        err.write(f"npsbayes: data error: {exc}\n")
        return EXIT_DATA
    except ConfigError as exc:
        err.write(f"npsbayes: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
