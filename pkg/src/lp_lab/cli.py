"""Command-line front end: ``lp-lab {construct,thickness,split,chain,probe,report}``.

Every run is described by a :class:`RunConfig`.  Flags fill it in, a JSON
``--config`` file overrides the flags, and :func:`run` turns it into a
report bundle that is written under ``--out-dir``.

Exit codes: 0 success, 2 invalid input, 3 numerical-reliability failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import combinatorics as comb
from . import fourier, io, sets, thickness
from .exceptions import LPLabError, ReliabilityError, ValidationError

COMMANDS = ("construct", "thickness", "split", "chain", "probe", "report")
FAMILIES = ("cantor", "dyadic", "sumset", "generated", "theorem3", "file")
ANALYSES = ("measure", "porosity", "boxdim", "theorem2", "all")
PROBES = ("frame", "dirichlet", "rademacher", "khintchine", "chain", "growth", "norm")
NORM_HEADER = ("n_or_N", "p", "value", "stderr", "seed")


@dataclass
class RunConfig:
    """Everything that determines a run.  Unused fields are ignored by a command."""

    command: str = "construct"
    family: str | None = None
    depth: int | None = None
    k_min: int = 0
    k_max: int = 10
    lengths: list | None = None
    b: float = math.log(2.0)
    psi: str = "powerlog"
    psi_param: float = 2.0
    K: int = 4
    set_file: str | None = None
    analysis: str = "all"
    deltas: list | None = None
    scales: list | None = None
    interval: list | None = None
    resolution: int = 8
    p: float | None = None
    tau: float | None = None
    ap: list | None = None
    points: list | None = None
    delta: float | None = None
    n: int = 2
    n_list: list | None = None
    N: int = 256
    N_list: list | None = None
    k_list: list | None = None
    coeffs: list | None = None
    probe: str = "frame"
    trials: int = 200
    M: int | None = None
    freq_scale: float = 1.0
    mode: str = "auto"
    heuristic: bool = False
    seed: int = 0
    out_dir: str = "lp_lab_out"
    format: str = "json"
    schema_version: int = io.SCHEMA_VERSION

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        cfg = cls()
        cfg.update(data)
        return cfg

    def update(self, data: dict):
        names = {f.name for f in dataclasses.fields(self)}
        for key, value in data.items():
            if key not in names:
                raise ValidationError(f"unknown config key {key!r}", field=key)
            setattr(self, key, value)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hashed_part(self) -> dict:
        """Fields that can influence results (output location and format excluded)."""
        d = self.to_dict()
        d.pop("out_dir")
        d.pop("format")
        return d

    def validate(self):
        def need(cond, name, msg):
            if not cond:
                raise ValidationError(f"{name}: {msg}", field=name)

        need(self.schema_version == io.SCHEMA_VERSION, "schema_version",
             f"expected {io.SCHEMA_VERSION}, found {self.schema_version!r}")
        need(self.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
        need(self.family is None or self.family in FAMILIES, "family", f"must be one of {', '.join(FAMILIES)}")
        need(self.analysis in ANALYSES, "analysis", f"must be one of {', '.join(ANALYSES)}")
        need(self.probe in PROBES, "probe", f"must be one of {', '.join(PROBES)}")
        need(self.format in ("json", "csv"), "format", "must be json or csv")
        need(self.mode in ("auto", "exhaustive", "montecarlo"), "mode", "must be auto, exhaustive or montecarlo")
        for name in ("depth", "k_min", "k_max", "K", "resolution", "n", "N", "trials", "seed"):
            v = getattr(self, name)
            need(v is None or (isinstance(v, int) and not isinstance(v, bool)), name, "must be an integer")
        need(self.depth is None or self.depth >= 0, "depth", "must be >= 0")
        need(self.K >= 1, "K", "must be >= 1")
        need(self.trials >= 1, "trials", "must be >= 1")
        need(self.seed >= 0, "seed", "must be >= 0")
        need(self.resolution >= 1, "resolution", "must be >= 1")
        need(self.p is None or (isinstance(self.p, (int, float)) and self.p >= 1), "p", "must be a number >= 1")
        need(self.M is None or (isinstance(self.M, int) and self.M >= 8 and not self.M & (self.M - 1)),
             "M", "must be a power of two >= 8")
        need(self.ap is None or len(self.ap) == 3, "ap", "must be [a, d, N]")
        need(self.interval is None or len(self.interval) == 2, "interval", "must be [lo, hi]")
        need(self.family != "file" or self.set_file, "set_file", "required for family 'file'")


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


@dataclass
class ReportBundle:
    report: dict
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    gapset: sets.GapSet | None = None


def build_set(cfg: RunConfig):
    """``(GapSet, extras)``; extras holds the generating sequence or gauge when there is one."""
    fam = cfg.family
    if fam is None and cfg.set_file is not None:
        fam = "file"
    if fam is None:
        raise ValidationError("family: a set family is required for this command", field="family")
    if fam == "cantor":
        return sets.cantor_triadic(6 if cfg.depth is None else cfg.depth), {}
    if fam == "dyadic":
        return sets.dyadic_set(cfg.k_min, cfg.k_max), {}
    if fam == "sumset":
        lengths = cfg.lengths if cfg.lengths is not None else [1.0, 1 / 3, 1 / 9]
        return sets.sum_set([float(v) for v in lengths]), {}
    if fam == "generated":
        seq = sets.GapSequence.geometric(cfg.b)
        return sets.generated_set(seq, 8 if cfg.depth is None else cfg.depth), {"sequence": seq}
    if fam == "theorem3":
        psi = sets.PsiSpec(cfg.psi, cfg.psi_param)
        res = sets.theorem3_set(psi, cfg.K)
        return res.gapset, {"psi": psi, "theorem3": res}
    return io.load_set(cfg.set_file), {}


def _grid(base, lo, hi, scale=1.0):
    return [scale * float(base) ** (-j) for j in range(lo, hi + 1)]


def _thickness(cfg, S, extras, tables):
    out = {}
    kinds = ("measure", "porosity", "boxdim") if cfg.analysis == "all" else (cfg.analysis,)
    deltas = cfg.deltas if cfg.deltas is not None else _grid(2, 2, 12, max(S.length, 1.0))
    if "measure" in kinds:
        bound, label = None, None
        if "sequence" in extras:
            seq = extras["sequence"]
            bound, label = (lambda d: thickness.gap_lower_bound(seq, d)), "gap_lower_bound"
        elif "psi" in extras:
            psi = extras["psi"]
            bound, label = (lambda d: psi(d) if d < psi.delta0 else float("nan")), "psi"
        rows = thickness.thickness_rows(S, deltas, bound)
        if not any(r[3] for r in rows):
            raise ReliabilityError(f"every delta lies below the reliable floor {thickness.reliable_floor(S):.3g}")
        tables["thickness"] = (("delta", "measure", "bound", "reliable"), rows)
        out["measure"] = {"bound": label, "reliable_floor": thickness.reliable_floor(S), "rows": len(rows)}
    if "porosity" in kinds:
        est = thickness.porosity_estimate(S, cfg.resolution)
        out["porosity"] = dataclasses.asdict(est)
    if "boxdim" in kinds:
        base = 3 if cfg.family == "cantor" else 2
        scales = cfg.scales if cfg.scales is not None else _grid(base, 1, 8, S.length)
        fit = thickness.box_counting(S, scales)
        tables["boxdim"] = (("scale", "count", "reliable"), list(zip(fit.scales, fit.counts, fit.reliable)))
        out["boxdim"] = fit.to_dict()
    if "theorem2" in kinds:
        interval = cfg.interval if cfg.interval is not None else list(S.window)
        fit = thickness.theorem2_fit(S, interval, deltas, p=cfg.p if cfg.p is not None and cfg.p < 2 else None)
        out["theorem2"] = fit.to_dict()
    return out


def _split(cfg, S):
    out = {}
    if cfg.ap is not None:
        a, d, N = cfg.ap
        nu, subset, ks = comb.max_splitting_subset(S, comb.APSpec(float(a), float(d), int(N)))
        cert = comb.splits(subset, S)
        out["ap"] = {"nu": nu, "subset": subset.tolist(), "k": ks, "certificate": cert.to_dict()}
    if cfg.points is not None:
        cert = comb.splits(cfg.points, S)
        out["points"] = {"certificate": cert.to_dict(), "reason": cert.reason}
        if cfg.delta is not None:
            xi = comb.lemma2_shift(cfg.points, S, cfg.delta)
            out["points"]["shift"] = xi
            out["points"]["shifted_certificate"] = comb.splits(np.asarray(cfg.points, dtype=float) + xi, S).to_dict()
    if not out:
        raise ValidationError("ap: split needs --ap or --points", field="ap")
    return out


def _chain(cfg):
    if cfg.points is None:
        raise ValidationError("points: chain needs --points", field="points")
    ch = comb.find_chain(cfg.points, cfg.n, heuristic=cfg.heuristic)
    out = {"n": cfg.n, "found": ch is not None, "chain": ch.to_dict() if ch else None,
           "search": "heuristic (incomplete)" if cfg.heuristic else "exact"}
    if ch is not None and cfg.family is not None:
        S, _ = build_set(cfg)
        delta0 = cfg.delta if cfg.delta is not None else 0.1
        xi, cert = comb.chain_split_shift(ch, S, delta0)
        out["split"] = {"shift": xi, "certificate": cert.to_dict()}
    return out


def _probe(cfg, tables):
    kind = cfg.probe
    seed = cfg.seed
    if kind == "frame":
        S, _ = build_set(cfg)
        p = 4 / 3 if cfg.p is None else cfg.p
        M = cfg.M if cfg.M is not None else fourier._pow2_at_least(4 * max(1, math.ceil(S.window[1] * cfg.freq_scale)) + 8)
        c1, c2, rep = fourier.frame_probe(S, p, cfg.trials, M, seed, cfg.freq_scale)
        return rep.to_dict(), S
    if kind == "dirichlet":
        p = 4 / 3 if cfg.p is None else cfg.p
        Ns = cfg.N_list if cfg.N_list is not None else [2**k for k in range(4, 13)]
        fit = fourier.dirichlet_scaling(p, Ns)
        tables["norms"] = (NORM_HEADER, [(n, p, v, 0.0, "") for n, v in zip(Ns, fit.extras["norms"])])
        return {"experiment": "dirichlet_scaling", "fit": fit.to_dict()}, None
    if kind == "rademacher":
        p = 4 / 3 if cfg.p is None else cfg.p
        if cfg.k_list is not None:
            ks = [int(k) for k in cfg.k_list]
        else:
            S, _ = build_set(cfg) if cfg.family else (sets.dyadic_set(0, 12), {})
            ap = cfg.ap if cfg.ap is not None else [0, 1, cfg.N]
            _, subset, _ = comb.max_splitting_subset(S, comb.APSpec(float(ap[0]), float(ap[1]), int(ap[2])))
            ks = [int(round(v)) for v in subset]
        rep = fourier.rademacher_experiment(ks, cfg.N, p, cfg.mode, cfg.trials, seed, cfg.M)
        s = rep.scalars
        tables["norms"] = (NORM_HEADER, [(cfg.N, p, s["average_norm"], s["stderr_pnorm_p"], rep.seed)])
        return rep.to_dict(), None
    if kind == "khintchine":
        p = 1.0 if cfg.p is None else cfg.p
        c = cfg.coeffs if cfg.coeffs is not None else [1.0] * 10
        ratio, se = fourier._khintchine(c, p, cfg.mode, cfg.trials, seed)
        tables["norms"] = (NORM_HEADER, [(len(c), p, ratio, se, seed)])
        return {"experiment": "khintchine", "p": p, "n": len(c), "ratio": ratio, "stderr": se, "seed": seed}, None
    if kind == "chain":
        p = 4 / 3 if cfg.p is None else cfg.p
        r, R, check = fourier.chain_ratio(cfg.n, p)
        tables["norms"] = (NORM_HEADER, [(cfg.n, p, R, 0.0, "")])
        return {"experiment": "chain_ratio", "n": cfg.n, "p": p, "r_p": r, "R_n": R, "factorization_gap": check}, None
    if kind == "growth":
        p = 4 / 3 if cfg.p is None else cfg.p
        ns = cfg.n_list if cfg.n_list is not None else list(range(1, 21))
        rep = fourier.lemma4_growth(ns, p)
        tables["norms"] = (NORM_HEADER, [(row["n"], p, row["R_n"], 0.0, "") for row in rep.table])
        return rep.to_dict(), None
    # norm
    p = 2.0 if cfg.p is None else cfg.p
    ks = cfg.k_list if cfg.k_list is not None else list(range(1, cfg.N + 1))
    c = cfg.coeffs if cfg.coeffs is not None else [1.0] * len(ks)
    value = fourier.lp_norm(fourier.TrigPolynomial(ks, c), p, cfg.M)
    tables["norms"] = (NORM_HEADER, [(len(ks), p, value, 0.0, "")])
    return {"experiment": "lp_norm", "p": p, "value": value}, None


def run(config) -> ReportBundle:
    """Execute one configured command and return its report bundle (nothing is written)."""
    cfg = config if isinstance(config, RunConfig) else RunConfig.from_mapping(dict(config))
    cfg.validate()
    tables, S, extras = {}, None, {}
    if cfg.command == "construct":
        S, extras = build_set(cfg)
        results = {"gapset": S.to_dict(), "n_components": S.n_components}
        if "theorem3" in extras:
            t3 = extras["theorem3"]
            results["theorem3"] = {
                "limit": t3.limit,
                "exponents": list(t3.exponents),
                "certificates": [c.to_dict() for c in t3.certificates],
                "psi_tilde_applied": t3.psi_tilde_applied,
                "tail_bound": t3.tail_bound,
            }
        if "sequence" in extras and cfg.tau is not None:
            results["ratio_condition"] = {"tau": cfg.tau, "holds": extras["sequence"].ratio_condition(cfg.tau, 64)}
    elif cfg.command == "thickness":
        S, extras = build_set(cfg)
        results = _thickness(cfg, S, extras, tables)
    elif cfg.command == "split":
        S, _ = build_set(cfg)
        results = _split(cfg, S)
    elif cfg.command == "chain":
        results = _chain(cfg)
    elif cfg.command == "probe":
        results, S = _probe(cfg, tables)
    else:
        results = summarise(Path(cfg.out_dir), tables)
    report = {
        "schema_version": io.SCHEMA_VERSION,
        "command": cfg.command,
        "config": cfg.hashed_part(),
        "config_hash": io.config_hash(cfg.hashed_part()),
        "seed": cfg.seed,
        "residual": S.residual if S is not None else None,
        "reliability": {
            "resolution": S.resolution if S is not None else None,
            "reliable_floor": thickness.reliable_floor(S) if S is not None else None,
            "truncated": bool(S is not None and S.resolution > 0),
        },
        "results": results,
    }
    return ReportBundle(report=report, tables=tables, gapset=S if cfg.command == "construct" else None)


def summarise(out_dir: Path, tables) -> dict:
    """Index of the JSON reports already present in ``out_dir``."""
    rows = []
    for path in sorted(out_dir.glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if not isinstance(data, dict) or "config_hash" not in data:
            continue
        rows.append((path.name, data.get("command", ""), data["config_hash"][:12], data.get("seed", "")))
    tables["summary"] = (("file", "command", "config_hash", "seed"), rows)
    return {"reports": len(rows)}


def write_bundle(bundle: ReportBundle, out_dir, fmt="json", timestamp=True) -> list:
    out_dir = Path(out_dir)
    report = dict(bundle.report)
    if timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    written = []
    if fmt == "csv":
        for name, (header, rows) in bundle.tables.items():
            written.append(io.write_csv(out_dir / f"{report['command']}_{name}.csv", header, rows))
    else:
        report["tables"] = {name: {"header": list(h), "rows": [list(r) for r in rows]}
                            for name, (h, rows) in bundle.tables.items()}
    if bundle.gapset is not None:
        written.append(io.save_set(bundle.gapset, out_dir / "set.json"))
    written.insert(0, io.write_json(report, out_dir / f"{report['command']}.json"))
    return written


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def number(token: str) -> float:
    """``'0.25'``, ``'1/3'`` or ``'3^-2'``."""
    token = token.strip()
    try:
        if "^" in token:
            base, exp = token.split("^", 1)
            return float(base) ** float(exp)
        if "/" in token:
            num, den = token.split("/", 1)
            return float(num) / float(den)
        return float(token)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {token!r}") from None


def numbers(text: str) -> list:
    return [number(t) for t in text.split(",") if t.strip()]


def integers(text: str) -> list:
    out = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        if ":" in t:
            lo, hi = t.split(":", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(t))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("set family")
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--depth", type=int)
    g.add_argument("--k-min", dest="k_min", type=int)
    g.add_argument("--k-max", dest="k_max", type=int)
    g.add_argument("--lengths", type=numbers, help="comma list, e.g. 1,1/3,1/9")
    g.add_argument("--b", type=float, help="decay rate of delta_k = a e^{-kb} (generated family)")
    g.add_argument("--psi", choices=("power", "powerlog"))
    g.add_argument("--psi-param", dest="psi_param", type=float)
    g.add_argument("--K", type=int)
    g.add_argument("--set-file", dest="set_file")
    g.add_argument("--tau", type=float, help="ratio threshold checked against delta_{k+1}/delta_k")
    a = common.add_argument_group("analysis")
    a.add_argument("--analysis", choices=ANALYSES)
    a.add_argument("--deltas", type=numbers)
    a.add_argument("--scales", type=numbers)
    a.add_argument("--interval", type=numbers)
    a.add_argument("--resolution", type=int)
    a.add_argument("--ap", type=numbers, help="a,d,N")
    a.add_argument("--points", type=numbers)
    a.add_argument("--delta", type=float)
    a.add_argument("--heuristic", action="store_true", default=None)
    pr = common.add_argument_group("probes")
    pr.add_argument("--probe", choices=PROBES)
    pr.add_argument("--p", type=number)
    pr.add_argument("--n", type=int)
    pr.add_argument("--n-list", dest="n_list", type=integers, help="e.g. 1:20")
    pr.add_argument("--N", type=int)
    pr.add_argument("--N-list", dest="N_list", type=integers)
    pr.add_argument("--k-list", dest="k_list", type=integers)
    pr.add_argument("--coeffs", type=numbers)
    pr.add_argument("--trials", type=int)
    pr.add_argument("--M", type=int)
    pr.add_argument("--freq-scale", dest="freq_scale", type=float)
    pr.add_argument("--mode", choices=("auto", "exhaustive", "montecarlo"))
    o = common.add_argument_group("output")
    o.add_argument("--seed", type=int)
    o.add_argument("--out-dir", dest="out_dir")
    o.add_argument("--format", choices=("json", "csv"))
    o.add_argument("--config", help="JSON file; its keys override flags")
    o.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="lp-lab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "construct": "build a set and save it",
        "thickness": "neighbourhood measures, porosity, box dimension",
        "split": "splitting subsets of progressions and shift search",
        "chain": "search a point list for an n-chain",
        "probe": "Fourier-side experiments",
        "report": "index the reports in --out-dir",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(args) -> RunConfig:
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "quiet")}
    cfg = RunConfig.from_mapping(given)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ValidationError(f"no such config file: {path}", field="config")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ValidationError(f"{path}: not valid JSON ({err})", field="config") from None
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: expected a JSON object", field="config")
        cfg.update(data)
    return cfg


def _echo(report, written):
    res = report["results"]
    print(f"command      {report['command']}")
    print(f"config_hash  {report['config_hash'][:16]}")
    if report["residual"] is not None:
        print(f"residual     {report['residual']:.6g}")
    for key, value in res.items():
        if isinstance(value, (int, float, str, bool)):
            print(f"{key:<12} {value}")
        elif isinstance(value, dict):
            for k2, v2 in value.items():
                if isinstance(v2, (int, float, str, bool)) or v2 is None:
                    print(f"{key}.{k2:<12} {v2}")
    for path in written:
        print(f"wrote        {path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        bundle = run(cfg)
        written = write_bundle(bundle, cfg.out_dir, cfg.format)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (LPLabError, ValueError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    if not args.quiet:
        _echo(io.jsonable(bundle.report), written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
