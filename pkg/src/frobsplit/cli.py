"""Command-line entry point.

Every subcommand handler returns an Outcome (pass flag plus report lines);
`main` prints the lines and maps the flag to the exit code: 0 all checks
passed, 1 some check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from frobsplit import flagchart, grtower, parweights, repdims, stab01
from frobsplit.errors import FrobsplitError, NotInChart, OutsideBirationalLocus, ParseError
from frobsplit.gfpoly import PrimeField, parse_poly
from frobsplit.parweights import fmt
from frobsplit.splitcheck import splits_by_p_minus_1

MANIFEST_VERSION = 1


@dataclass
class Outcome:
    ok: bool
    lines: list = field(default_factory=list)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so batch jobs can report bad arguments per job
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(b):
    return "true" if b else "false"


def _read_text(arg):
    path = Path(arg)
    if path.is_file():
        return path.read_text()
    return arg


# split-check ------------------------------------------------------------------------

def cmd_split_check(args):
    field = PrimeField(args.p)
    sigma = parse_poly(_read_text(args.poly).strip(), field, nvars=args.nvars)
    rep = splits_by_p_minus_1(sigma)
    return Outcome(rep.splits, [rep.line()])


# flag-verify / delta-chain -----------------------------------------------------------

def cmd_flag_verify(args):
    rep = flagchart.flag_verify(args.r, args.p, orders=args.orders, chain=args.delta_chain)
    lines = [f"name={name} value={value} pass={_flag(ok)}" for name, value, ok in rep.checks]
    return Outcome(rep.ok, lines)


def cmd_delta_chain(args):
    rep = flagchart.delta_chain(args.r, args.p)
    lines = [f"name=delta_base value={rep.base_value} pass={_flag(rep.base_value != 0)}",
             f"name=delta_top_is_sigma value={_flag(rep.top_matches_sigma)} pass={_flag(rep.top_matches_sigma)}"]
    for lv in rep.levels:
        ok = lv.splits and lv.peel_ok and lv.matches_next
        lines.append(f"name=delta_{lv.k} vars={lv.nvars} coefficient={lv.coefficient} "
                     f"peel={_flag(lv.peel_ok)} matches_next={_flag(lv.matches_next)} pass={_flag(ok)}")
    return Outcome(rep.ok, lines)


# tower-verify ------------------------------------------------------------------------

def _round_trip(r, p, rng, samples=20):
    """phi_j^{-1}(phi_j(x)) == x for random chart points of each level j >= 1."""
    tower = grtower.build_tower(r, p)
    exact = skipped = 0
    for lower, upper in zip(tower, tower[1:]):
        for _ in range(samples):
            x = grtower.random_point(upper, rng)
            try:
                y = grtower.phi_point(upper, lower, x)
                back = grtower.phi_inverse_point(upper, lower, y)
            except (NotInChart, OutsideBirationalLocus):
                skipped += 1
                continue
            if [v % p for v in back] != [v % p for v in x]:
                return False, exact, skipped
            exact += 1
    return True, exact, skipped


def cmd_tower_verify(args):
    sigma_y = None
    if args.sigma_y:
        top = grtower.build_level(args.r, args.p, args.r - 1) if args.r > 2 else grtower.build_level(args.r, args.p, 1)
        sigma_y = parse_poly(_read_text(args.sigma_y).strip(), PrimeField(args.p), nvars=top.nvars)
    _, rep = grtower.corollary45_pipeline(args.r, args.p, sigma_y=sigma_y, heavy=args.heavy)
    lines = []
    for lv in rep.levels:
        lines.append(json.dumps({"r": args.r, "p": args.p, **lv.as_dict()}, sort_keys=True))
    ok, exact, skipped = _round_trip(args.r, args.p, np.random.default_rng(args.seed))
    lines.append(json.dumps({"r": args.r, "p": args.p, "check": "round_trip", "seed": args.seed,
                             "exact": exact, "not_in_chart": skipped, "pass": ok}, sort_keys=True))
    return Outcome(rep.ok and ok, lines)


# weights -----------------------------------------------------------------------------

def _parse_types(text):
    groups = re.findall(r"\(([^)]*)\)", text)
    if not groups:
        raise ParseError(f"no '(n1,n2,...)' groups in {text!r}")
    return [tuple(int(v) for v in g.split(",") if v.strip()) for g in groups]


def _labels(arg, count):
    if arg:
        labels = [s.strip() for s in arg.split(",")]
        if len(labels) != count:
            raise ParseError("--labels must name every type")
        return labels
    if count == 3:
        return list(parweights.CANONICAL_LABELS)
    return [f"x{i + 1}" for i in range(count)]


def _load_pardata(path):
    return parweights.parse_pardata(Path(path).read_text())


def cmd_weights(args):
    action = args.action
    if action == "canonical":
        types = _parse_types(args.types)
        om = parweights.canonical_weight(dict(zip(_labels(args.labels, len(types)), types)),
                                         args.rank, args.degree, args.genus)
        lines = parweights.format_pardata(om).splitlines()
        lines.append(f"par_chi={fmt(parweights.par_chi(om))}")
        return Outcome(True, lines)
    om = _load_pardata(args.config)
    if action == "sigma":
        labels = [args.point] if args.point else list(om.points)
        r1s = [args.r1] if args.r1 else list(range(1, om.r))
        lines = [f"point={x} r1={r1} sigma_min={fmt(parweights.sigma_min(om, x, r1))}"
                 for x in labels for r1 in r1s]
        return Outcome(True, lines)
    if action == "codim":
        cb = parweights.codim_bounds(om)
        show = lambda v: "none" if v is None else fmt(v)
        return Outcome(True, [f"first={show(cb.first)} second={show(cb.second)} sharp={show(cb.sharp)}"])
    if action == "hecke":
        out = parweights.hecke_transform(om, args.point)
        return Outcome(True, parweights.format_pardata(out).splitlines())
    if action == "ell":
        return Outcome(True, [f"par_chi={fmt(parweights.par_chi(om))} ell={fmt(parweights.ell(om))}"])
    two = None
    if args.part1 is not None:
        two = parweights.TwoComponent(om, frozenset(s for s in args.part1.split(",") if s), args.c1, args.c2)
    if action == "njomega":
        if two is None:
            raise ParseError("njomega needs --part1, --c1, --c2")
        chi = None if args.chi is None else parweights.Fraction(args.chi)
        n1, n2 = parweights.n_j_omega(two, chi=chi)
        return Outcome(True, [f"n1={fmt(n1)} n2={fmt(n2)}"])
    # gps
    r_F = tuple(int(v) for v in args.r_f.split(",")) if "," in args.r_f else int(args.r_f)
    prof = parweights.GPSProfile(r_F, parweights.Fraction(args.parchi_f), args.dimq_f,
                                 parweights.Fraction(args.alpha), args.dimq, two)
    parchi_E = parweights.Fraction(args.parchi_e) if args.parchi_e else parweights.par_chi(om)
    verdict = parweights.gps_alpha_semistable(prof, parchi_E, om.r)
    return Outcome(verdict != "unstable", [f"verdict={verdict}"])


# stab --------------------------------------------------------------------------------

def _vectors(M):
    return "[" + ";".join(",".join(str(int(v)) for v in M[:, c]) for c in range(M.shape[1])) + "]"


def cmd_stab(args):
    cfg = stab01.parse_flag_config(Path(args.config).read_text())
    om = _load_pardata(args.weights) if args.weights else stab01.omega_c0(cfg.r)
    gen = stab01.genericity_check_512(cfg)
    lines = [f"genericity={_flag(gen.holds)}" + (f" witness={gen.witness}" if gen.witness else "")]
    verdict, wit = stab01.subspace_destabilizer_search(cfg, om)
    line = f"subspace_verdict={verdict}"
    if wit is not None:
        line += f" witness={_vectors(wit.subspace)} gap={fmt(wit.gap)}"
    lines.append(line)
    agree = (verdict == "stable") == gen.holds
    if cfg.r == 2:
        brute = stab01.rank2_bruteforce(cfg, om)
        lines.append(f"rank2_verdict={brute}")
        agree = agree and brute == verdict
    lines.append(f"agreement={_flag(agree)}")
    if gen.holds and "z" in cfg.points:
        loci = stab01.special_loci(cfg)
        lines.append("L=" + " ".join(_vectors(L) for L in loci.lines))
        lines.append("H=" + " ".join(_vectors(H) for H in loci.Hs))
        lines.append(f"H_z={_vectors(loci.Hz)}")
    return Outcome(agree and verdict == "stable", lines)


# repdim ------------------------------------------------------------------------------

def cmd_repdim(args):
    r, m = args.r, args.m
    lhs = repdims.grass_sections_dim(r, m)
    terms = repdims.decomposition_terms(r, m)
    rhs = sum(t for _, _, t in terms)
    lines = [f"grass_sections_dim={lhs} decomposition_sum={rhs} identity={_flag(lhs == rhs)}"]
    ok = lhs == rhs
    for mu, nu, t in terms:
        line = f"mu={','.join(map(str, mu))} nu={','.join(map(str, nu))} term={t}"
        if args.p:
            inside = repdims.dominant_in_C(mu, args.p, r) and repdims.dominant_in_C(nu, args.p, r)
            line += f" in_C={_flag(inside)}"
        lines.append(line)
    if args.p:
        rect = repdims.dominant_in_C((m,) * r, args.p, r)
        lines.append(f"p={args.p} p_gt_r_plus_m={_flag(args.p > r + m)} rectangle_in_C={_flag(rect)}")
    return Outcome(ok, lines)


# batch -------------------------------------------------------------------------------

def _threads():
    try:
        return max(1, int(os.environ.get("FROBSPLIT_THREADS", "1")))
    except ValueError:
        return 1


def _run_job(job, seed):
    argv = [job["cmd"], *[str(a) for a in job.get("args", [])]]
    if "--seed" not in argv:
        argv = ["--seed", str(seed), *argv]
    try:
        return run(argv)
    except UsageError as exc:
        return Outcome(False, [f"error=usage {exc}"])
    except FrobsplitError as exc:
        return Outcome(False, [f"error={type(exc).__name__} {exc}"])


def parse_manifest(text):
    data = json.loads(text)
    if not isinstance(data, dict) or not isinstance(data.get("jobs", []), list):
        raise ParseError("manifest must be an object with a 'jobs' list")
    if data.get("version", MANIFEST_VERSION) != MANIFEST_VERSION:
        raise ParseError(f"unsupported manifest version {data.get('version')}")
    for i, job in enumerate(data.get("jobs", [])):
        if job.get("cmd") not in COMMANDS or job.get("cmd") == "batch":
            raise ParseError(f"job {i}: unknown subcommand {job.get('cmd')!r}")
    return {"version": MANIFEST_VERSION, "output": data.get("output"), "jobs": data.get("jobs", [])}


def cmd_batch(args):
    manifest = parse_manifest(Path(args.manifest).read_text())
    jobs = manifest["jobs"]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        outcomes = list(pool.map(lambda j: _run_job(j, args.seed), jobs))
    lines = []
    for i, (job, out) in enumerate(zip(jobs, outcomes)):
        lines.append(f"job={i} name={job['cmd']} pass={_flag(out.ok)}")
        lines.extend(out.lines)
    ok = all(o.ok for o in outcomes)
    target = args.output or manifest["output"]
    if target and target != "-":
        Path(target).write_text("".join(l + "\n" for l in lines))
        return Outcome(ok, [f"jobs={len(jobs)} pass={_flag(ok)} output={target}"])
    return Outcome(ok, lines)


# parser ------------------------------------------------------------------------------

COMMANDS = {
    "split-check": cmd_split_check,
    "flag-verify": cmd_flag_verify,
    "tower-verify": cmd_tower_verify,
    "weights": cmd_weights,
    "stab": cmd_stab,
    "repdim": cmd_repdim,
    "delta-chain": cmd_delta_chain,
    "batch": cmd_batch,
}


def build_parser():
    ap = _Parser(prog="frobsplit", description="Desk-scale Frobenius splitting and parabolic weight checks.")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("split-check", help="(p-1)-power splitting criterion for one polynomial")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--nvars", type=int, required=True)
    s.add_argument("--poly", required=True, help="polynomial text or a file holding it")

    s = sub.add_parser("flag-verify", help="splitting section on the full flag variety")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--orders", action="store_true", help="vanishing orders at the special loci")
    s.add_argument("--delta-chain", action="store_true", help="inductive chain of sections")

    s = sub.add_parser("delta-chain", help="inductive chain of sections on the partial flag varieties")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--p", type=int, required=True)

    s = sub.add_parser("tower-verify", help="Grassmannian tower pipeline, JSON lines per level")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--heavy", action="store_true")
    s.add_argument("--sigma-y", help="splitting section on the top level (text or file)")

    s = sub.add_parser("weights", help="parabolic weight calculus")
    s.add_argument("action", choices=["canonical", "sigma", "codim", "hecke", "ell", "gps", "njomega"])
    s.add_argument("--config", help="weight data file")
    s.add_argument("--types", help='e.g. "(2,1);(1,1,1);(1,1,1)"')
    s.add_argument("--labels", help="comma-separated point labels for --types")
    s.add_argument("--rank", type=int)
    s.add_argument("--degree", type=int, default=0)
    s.add_argument("--genus", type=int, default=0)
    s.add_argument("--point")
    s.add_argument("--r1", type=int)
    s.add_argument("--part1", help="labels on the first component")
    s.add_argument("--c1", type=int, default=1)
    s.add_argument("--c2", type=int, default=1)
    s.add_argument("--chi")
    s.add_argument("--r-f", dest="r_f", help="rank of F, or r1,r2 on two components")
    s.add_argument("--parchi-f", dest="parchi_f")
    s.add_argument("--dimq-f", dest="dimq_f", type=int)
    s.add_argument("--dimq", type=int)
    s.add_argument("--alpha")
    s.add_argument("--parchi-e", dest="parchi_e")

    s = sub.add_parser("stab", help="stability of flag configurations on the trivial bundle")
    s.add_argument("--config", required=True)
    s.add_argument("--weights", help="weight data file (default: canonical weights)")

    s = sub.add_parser("repdim", help="Weyl dimension bookkeeping")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--p", type=int)

    s = sub.add_parser("batch", help="run a JSON manifest of jobs")
    s.add_argument("manifest")
    s.add_argument("--output", help="report path (default: the manifest's, else stdout)")
    return ap


def _check_weights_args(args):
    need = {
        "canonical": ["types", "rank"],
        "sigma": ["config"], "codim": ["config"], "ell": ["config"],
        "hecke": ["config", "point"], "njomega": ["config"],
        "gps": ["config", "r_f", "parchi_f", "dimq_f", "dimq", "alpha"],
    }[args.action]
    missing = [n for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"weights {args.action}: missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def run(argv) -> Outcome:
    args = build_parser().parse_args(argv)
    if args.cmd == "weights":
        _check_weights_args(args)
    return COMMANDS[args.cmd](args)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        out = run(argv)
    except UsageError as exc:
        print(build_parser().format_usage().rstrip(), file=sys.stderr)
        print(exc, file=sys.stderr)
        return 2
    except (FrobsplitError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for line in out.lines:
        print(line)
    return 0 if out.ok else 1


if __name__ == "__main__":
    sys.exit(main())
