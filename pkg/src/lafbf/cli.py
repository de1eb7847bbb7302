"""Command line entry point: ``lafbf {synth,bands,variogram,validate}``.

Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 infeasible band
plan, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .bands import InfeasiblePlanError
from .fbm_line import EmbeddingError
from .orientation import OrientationField, parse_orientation
from .synthesis import SynthesisParams

log = logging.getLogger("lafbf")

COMMANDS = ("synth", "bands", "variogram", "validate")
EXIT_IO, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 1, 2, 3, 4

DEFAULTS = {
    "size": 256,
    "hurst": 0.2,
    "alpha": 0.1,
    "epsilon": 0.01,
    "seed": 0,
    "regularized": True,
    "sigma": None,
    "q_max": None,
    "orientation": "v1",
    "out": None,
    "format": None,
    "force": False,
    "lags": None,
    "n_seeds": 20,
    "x0": None,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: SynthesisParams
    orientation_spec: str = "v1"
    out: Path | None = None
    format: str | None = None
    force: bool = False
    lags: tuple[tuple[int, int], ...] = ()
    n_seeds: int = 20
    x0: tuple[int, int] | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def orientation(self) -> OrientationField:
        return parse_orientation(self.orientation_spec)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"regularized: expected a boolean, got {text!r}")


def _pair(text: str, key: str) -> tuple[int, int]:
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"{key}: expected 'int,int', got {text!r}") from None


def _lags(text: str) -> tuple[tuple[int, int], ...]:
    return tuple(_pair(item, "lags") for item in text.split(";") if item.strip())


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in DEFAULTS:
            raise ConfigError(f"{path}:{n}: unknown key {k!r}")
        out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lafbf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-v", "--verbose", action="store_true")
        p.add_argument("--config", help="flat key=value file; flags override its keys")
        p.add_argument("--size", type=int, help="grid side r+1, a power of two (default 256)")
        p.add_argument("--hurst", type=float, help="Hurst index in (0, 1) (default 0.2)")
        p.add_argument("--alpha", type=float, help="sector half-width in (0, pi/2] (default 0.1)")
        p.add_argument("--epsilon", type=float, help="max band width in radians (default 0.01)")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed (default 0)")
        p.add_argument("--regularized", help="Gaussian-smoothed indicator (default true)")
        p.add_argument("--sigma", type=float, help="Gaussian width (default alpha)")
        p.add_argument("--q-max", dest="q_max", type=int, help="largest band denominator")
        p.add_argument("--orientation",
                       help="constant:<rad> | v1 | v2 | v3 | raster:<path> | gradient:<path>")
        p.add_argument("--out", help="output path (stdout for CSV commands if omitted)")
        p.add_argument("--format", choices=("pgm", "raw", "csv"))
        p.add_argument("--force", action="store_const", const=True, help="overwrite --out")
        p.add_argument("--lags", help="pixel lags 'dx,dy;dx,dy;...'")
        p.add_argument("--n-seeds", dest="n_seeds", type=int, help="realizations (default 20)")
        p.add_argument("--x0", help="probe pixel 'k1,k2' for local variograms")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    values = dict(DEFAULTS)
    if args.config:
        values.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        size = int(values["size"])
        hurst = float(values["hurst"])
        alpha = float(values["alpha"])
        epsilon = float(values["epsilon"])
        seed = int(values["seed"])
        sigma = None if values["sigma"] in (None, "") else float(values["sigma"])
        q_max = None if values["q_max"] in (None, "") else int(values["q_max"])
        n_seeds = int(values["n_seeds"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid numeric value: {exc}") from None
    if size < 2 or size & (size - 1):
        raise ConfigError(f"size: must be a power of two >= 2 (r = 2^k - 1), got {size}")
    if not 0.0 < hurst < 1.0:
        raise ConfigError(f"hurst: must lie in (0, 1), got {hurst}")
    if not 0.0 < alpha <= math.pi / 2:
        raise ConfigError(f"alpha: must lie in (0, pi/2], got {alpha}")
    if not epsilon > 0.0:
        raise ConfigError(f"epsilon: must be > 0, got {epsilon}")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed: must lie in [0, 2^64), got {seed}")
    if sigma is not None and not sigma > 0:
        raise ConfigError(f"sigma: must be > 0, got {sigma}")
    if q_max is not None and q_max < 1:
        raise ConfigError(f"q_max: must be >= 1, got {q_max}")
    if n_seeds < 1:
        raise ConfigError(f"n_seeds: must be >= 1, got {n_seeds}")
    params = SynthesisParams(
        hurst=hurst, alpha=alpha, epsilon=epsilon, grid_order=size - 1, seed=seed,
        regularized=_bool(values["regularized"]), sigma=sigma, q_max=q_max,
    )
    lags = values["lags"]
    x0 = values["x0"]
    return RunConfig(
        command=args.command,
        params=params,
        orientation_spec=str(values["orientation"]),
        out=None if values["out"] in (None, "") else Path(values["out"]),
        format=values["format"],
        force=_bool(values["force"]),
        lags=_lags(lags) if lags else (),
        n_seeds=n_seeds,
        x0=_pair(x0, "x0") if x0 else None,
        extra={"verbose": args.verbose},
    )


def _emit(text: str, out: Path | None, force: bool) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    if out.exists() and not force:
        raise FileExistsError(f"{out} exists (use --force to overwrite)")
    out.write_text(text)


def _cmd_synth(cfg: RunConfig) -> None:
    from .io import write_grid, write_provenance
    from .synthesis import precompute, synthesize_lafbf

    if cfg.out is None:
        raise ConfigError("synth: --out is required")
    field_ = cfg.orientation()
    state = precompute(cfg.params)
    grid = synthesize_lafbf(cfg.params, field_, state)
    path = write_grid(grid, cfg.out, cfg.format, force=cfg.force)
    write_provenance(grid, path.with_name(path.name + ".json"))
    log.info("wrote %s (%d bands, plan %s)", path, len(state.plan), grid.plan_digest)


def _cmd_bands(cfg: RunConfig) -> None:
    _emit(cfg.params.plan().to_csv(), cfg.out, cfg.force)


DEFAULT_LAGS = tuple((k * dx, k * dy) for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1))
                     for k in (1, 2, 4, 8))


def _cmd_variogram(cfg: RunConfig) -> None:
    from .synthesis import alpha0_grid, precompute, synthesize_lafbf
    from .validation import empirical_variogram, local_variograms, theoretical_variogram

    p = cfg.params
    r = p.grid_order
    field_ = cfg.orientation()
    lags = cfg.lags or DEFAULT_LAGS
    if field_.kind == "constant":
        a0 = field_.payload
        grids = []
        for s in range(cfg.n_seeds):
            ps = replace(p, seed=p.seed + s)
            grids.append(synthesize_lafbf(ps, field_, precompute(ps)))
        est = empirical_variogram(grids, lags)
    else:
        if cfg.x0 is None:
            raise ConfigError("variogram: non-constant orientation needs --x0 k1,k2")
        a0 = float(alpha0_grid(field_, r)[cfg.x0[1], cfg.x0[0]])
        est = local_variograms(p, field_, [cfg.x0], lags, cfg.n_seeds)[cfg.x0]
    rows = ["lag_x,lag_y,empirical,theoretical,std_error,n_pairs"]
    for e in est:
        th = theoretical_variogram(p.hurst, a0, p.weight, (e.lag[0] / r, e.lag[1] / r))
        rows.append(f"{e.lag[0]},{e.lag[1]},{e.value!r},{th!r},{e.std_error!r},{e.n_pairs}")
    _emit("\n".join(rows) + "\n", cfg.out, cfg.force)


def _cmd_validate(cfg: RunConfig) -> bool:
    from .selfcheck import run_checks

    ok = True
    for name, passed, detail in run_checks(cfg.params.seed):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return ok


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"lafbf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"lafbf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else 0
    logging.basicConfig(level=logging.INFO if cfg.extra.get("verbose") else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if cfg.command == "synth":
            _cmd_synth(cfg)
        elif cfg.command == "bands":
            _cmd_bands(cfg)
        elif cfg.command == "variogram":
            _cmd_variogram(cfg)
        elif not _cmd_validate(cfg):
            return EXIT_NUMERIC
    except InfeasiblePlanError as exc:
        print(f"lafbf: infeasible band plan: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (EmbeddingError, ArithmeticError) as exc:
        print(f"lafbf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"lafbf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"lafbf: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ValueError) else EXIT_IO
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
