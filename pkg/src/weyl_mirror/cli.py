"""Command-line front end for the weyl-mirror verification engine.

Subcommands:
    sadm      degree bound D and the number of admissible exponents
    mirror    residue-side dual product vs Gromov-Witten triples (types A, D)
    duality   pointwise check of the dual product on the E-type orbit space
    wdvv      associativity of a prepotential at random rational points
    lemma-d   per-pole residue closed forms vs the generic residue oracle (type D)
    report    render a saved JSON report as text

Exit status: 0 when every check passes, 1 on a mathematical mismatch,
2 on usage or data errors.

Examples:
    weyl-mirror sadm --family E6
    weyl-mirror mirror --family D --rank 4 --seed 7
    weyl-mirror duality --family E --rank 6 --threads 4 --output e6.json
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from fractions import Fraction as Q
from typing import Sequence

from . import frobdual
from .gw import DiscriminantError, GwContext, gw_triple, gw_triple_a2
from .lg import (
    INF,
    GenericityError,
    build_superpotential,
    kappa_from_point,
    lemma_closed_form,
    lg_dual_triple,
    per_pole_contribution,
)
from .rootsys import marked_pair

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "WEYL_MIRROR_THREADS"


class UsageError(Exception):
    pass


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer") from None
    return os.cpu_count() or 1


def _family_rank(args) -> tuple[str, int]:
    m = re.fullmatch(r"([ADEade])(\d*)", args.family or "")
    if not m:
        raise UsageError("--family must be A, D or E, optionally with the rank (e.g. E6)")
    fam = m.group(1).upper()
    rank = int(m.group(2)) if m.group(2) else args.rank
    if rank is None:
        raise UsageError("rank required (--rank or e.g. --family E6)")
    if args.rank is not None and rank != args.rank:
        raise UsageError("conflicting ranks in --family and --rank")
    return fam, rank


def _marked(args):
    fam, rank = _family_rank(args)
    try:
        return marked_pair(fam, rank, getattr(args, "k", None) if fam == "A" else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _frac(v: Q) -> str:
    return str(v)


def _check(label: dict, lhs: Q, rhs: Q) -> dict:
    return {**label, "lhs": _frac(lhs), "rhs": _frac(rhs), "equal": lhs == rhs}


# ---------------------------------------------------------------------------
# mirror: types A and D
# ---------------------------------------------------------------------------


def mirror_points(mp, count: int, seed: int) -> list[tuple[Q, ...]]:
    """Torus points off the discriminant whose kappa values give a generic superpotential."""
    out: list[tuple[Q, ...]] = []
    batch = 0
    while len(out) < count:
        if batch > 50:
            raise RuntimeError("retry budget exhausted while sampling points")
        for p in frobdual.sample_points(mp, count, seed + 104729 * batch):
            try:
                build_superpotential(mp, kappa_from_point(mp, p.q))
            except GenericityError:
                continue
            if p.q not in out:
                out.append(p.q)
            if len(out) == count:
                break
        batch += 1
    return out


def sample_kappas(mp, count: int, seed: int) -> list[tuple[Q, ...]]:
    """Seeded generic kappa tuples drawn from the prime-ratio pool."""
    import random

    rng = random.Random(seed)
    out: list[tuple[Q, ...]] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 10000:
            raise RuntimeError("retry budget exhausted while sampling points")
        kappa = tuple(rng.choice(frobdual.POOL) for _ in range(mp.rank))
        try:
            build_superpotential(mp, kappa)
        except GenericityError:
            continue
        if kappa not in out:
            out.append(kappa)
    return out


def mirror_point_checks(args) -> list[dict]:
    """All triples 1 <= i <= j <= k <= l+1 at one torus point."""
    mp, q, index = args
    sp = build_superpotential(mp, kappa_from_point(mp, q))
    if mp.family == "A":
        ctx = GwContext.restricted(mp, 1)
        gw = gw_triple_a2
    else:
        ctx = GwContext(mp, 1)
        gw = gw_triple
    n = mp.rank + 1
    out = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for k in range(j, n + 1):
                out.append(_check({"i": i, "j": j, "k": k, "point_index": index}, lg_dual_triple(sp, i, j, k), gw(ctx, i, j, k, q)))
    return out


def run_mirror(mp, seed: int, count: int, threads: int) -> dict:
    if mp.family not in ("A", "D"):
        raise UsageError("mirror check is available for types A and D")
    start = time.perf_counter()
    pts = mirror_points(mp, count, seed)
    results = frobdual.parallel_map(mirror_point_checks, [(mp, q, idx) for idx, q in enumerate(pts)], threads)
    checks = [c for chunk in results for c in chunk]
    return {
        "command": "mirror",
        "family": mp.family,
        "rank": mp.rank,
        "k": mp.marked_node,
        "seed": seed,
        "points": [[_frac(v) for v in q] for q in pts],
        "checks": checks,
        "pass": all(c["equal"] for c in checks),
        "elapsed_ms": int((time.perf_counter() - start) * 1000),
    }


# ---------------------------------------------------------------------------
# lemma-d
# ---------------------------------------------------------------------------


def lemma_point_checks(args) -> list[dict]:
    mp, kappa, index = args
    l = mp.rank
    sp = build_superpotential(mp, kappa)
    out = []
    n = l + 1
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            for k in range(j, n + 1):
                label = {"i": i, "j": j, "k": k, "point_index": index}
                for tag, name in ((Q(0), "0"), (INF, "inf"), (Q(1), "1"), (Q(-1), "-1")):
                    oracle = per_pole_contribution(sp, i, j, k, tag)
                    closed = lemma_closed_form(l, kappa, i, j, k, 0 if tag == 0 else tag)
                    out.append(_check({**label, "pole": name}, closed, oracle))
                for m in range(1, l + 1):
                    oracle = per_pole_contribution(sp, i, j, k, ("kappa", m, 1)) + per_pole_contribution(
                        sp, i, j, k, ("kappa", m, -1)
                    )
                    closed = lemma_closed_form(l, kappa, i, j, k, ("pair", m))
                    out.append(_check({**label, "pole": f"kappa{m}"}, closed, oracle))
    return out


def run_lemma(mp, seed: int, count: int, threads: int) -> dict:
    if mp.family != "D":
        raise UsageError("lemma-d needs type D")
    start = time.perf_counter()
    pts = sample_kappas(mp, count, seed)
    results = frobdual.parallel_map(lemma_point_checks, [(mp, q, idx) for idx, q in enumerate(pts)], threads)
    checks = [c for chunk in results for c in chunk]
    return {
        "command": "lemma-d",
        "family": "D",
        "rank": mp.rank,
        "seed": seed,
        "points": [[_frac(v) for v in q] for q in pts],
        "checks": checks,
        "pass": all(c["equal"] for c in checks),
        "elapsed_ms": int((time.perf_counter() - start) * 1000),
    }


# ---------------------------------------------------------------------------
# wdvv
# ---------------------------------------------------------------------------


def run_wdvv(F: frobdual.Prepotential, seed: int, count: int, family: str, rank: int) -> dict:
    import random

    start = time.perf_counter()
    _, eta = frobdual.find_unit_and_eta(F)
    rng = random.Random(seed)
    records = []
    for idx in range(count):
        t = tuple(rng.choice(frobdual.POOL) for _ in range(F.l))
        s = rng.choice(frobdual.POOL)
        res = frobdual.wdvv_residual(F, eta, frobdual.TPoint(t, s))
        records.append({"point_index": idx, "t": [_frac(v) for v in t], "s": _frac(s), "residual": res})
    return {
        "command": "wdvv",
        "family": family,
        "rank": rank,
        "seed": seed,
        "checks": records,
        "pass": all(r["residual"] == 0 for r in records),
        "elapsed_ms": int((time.perf_counter() - start) * 1000),
    }


# ---------------------------------------------------------------------------
# report rendering
# ---------------------------------------------------------------------------


def render_report(rep: dict) -> str:
    cmd = rep.get("command", "duality")
    head = f"{cmd}: {rep.get('family')}{rep.get('rank')}"
    if cmd == "mirror" and rep.get("family") == "A":
        head += f" k={rep.get('k')}"
    lines = [head, f"seed={rep.get('seed')}"]
    if cmd == "duality":
        lines.append(f"D={rep.get('D')} |S_adm|={rep.get('s_adm_size')} certificate={rep.get('certificate')}")
    checks = rep.get("checks", [])
    if cmd == "wdvv":
        bad = [c for c in checks if c["residual"] != 0]
    else:
        bad = [c for c in checks if not c["equal"]]
    lines.append(f"points={len(rep.get('points', checks))} checks={len(checks)} mismatches={len(bad)}")
    for c in bad[:20]:
        lines.append("  mismatch " + " ".join(f"{k}={v}" for k, v in c.items() if k != "equal"))
    lines.append("PASS" if rep.get("pass") else "FAIL")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weyl-mirror", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command")

    def common(sp, seed=True, points=None):
        sp.add_argument("--family", required=True, help="A, D or E, optionally with the rank (E6)")
        sp.add_argument("--rank", type=int, default=None)
        sp.add_argument("--k", type=int, default=None, help="marked node for type A (1-based)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--threads", type=int, default=None, help=f"worker processes (default: ${THREADS_ENV} or CPU count)")
            sp.add_argument("--output", default=None, help="write the JSON report here")
        if points is not None:
            sp.add_argument("--points", type=int, default=points, help=f"number of sample points (default {points})")

    common(sub.add_parser("sadm", help="degree bound and admissible exponents"), seed=False)
    common(sub.add_parser("mirror", help="residue vs Gromov-Witten triples (A, D)"), points=10)
    d = sub.add_parser("duality", help="E-type initial-conditions pipeline")
    common(d)
    d.add_argument("--prepotential", default=None)
    d.add_argument("--flatmap", default=None)
    w = sub.add_parser("wdvv", help="associativity of a prepotential")
    common(w, points=10)
    w.add_argument("--prepotential", default=None)
    common(sub.add_parser("lemma-d", help="type D per-pole closed forms"), points=20)
    r = sub.add_parser("report", help="render a saved JSON report")
    r.add_argument("path")
    return p


def _emit(rep: dict, output: str | None) -> None:
    text = json.dumps(rep, indent=2, sort_keys=True)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(render_report(rep))


def _threads(args) -> int:
    if args.threads is None:
        return _default_threads()
    if args.threads < 1:
        raise UsageError("--threads must be positive")
    return args.threads


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "report":
        try:
            with open(args.path, encoding="utf-8") as fh:
                rep = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read report: {exc}") from None
        print(render_report(rep))
        return EXIT_OK if rep.get("pass") else EXIT_MISMATCH

    mp = _marked(args)
    if cmd == "sadm":
        D, exps = frobdual.admissible_exponents(mp)
        print(f"D={D} |S_adm|={len(exps)}")
        return EXIT_OK
    if getattr(args, "points", 1) is not None and getattr(args, "points", 1) < 1:
        raise UsageError("--points must be positive")

    if cmd == "mirror":
        if mp.family == "A" and args.k is None:
            raise UsageError("type A requires --k")
        rep = run_mirror(mp, args.seed, args.points, _threads(args))
    elif cmd == "lemma-d":
        rep = run_lemma(mp, args.seed, args.points, _threads(args))
    elif cmd == "wdvv":
        if args.prepotential is None:
            F, _ = frobdual.load_data(mp)
        else:
            with open(args.prepotential, encoding="utf-8") as fh:
                fam, rank, F = frobdual.parse_prepotential(fh.read())
            if (fam, rank) != (mp.family, mp.rank):
                raise frobdual.DataError("data files do not match the requested root system")
        rep = run_wdvv(F, args.seed, args.points, mp.family, mp.rank)
    elif cmd == "duality":
        F, fm = frobdual.load_data(mp, args.prepotential, args.flatmap)
        report = frobdual.verify_duality(mp, F, fm, args.seed, _threads(args))
        rep = {"command": "duality", **report.to_json()}
    else:
        raise UsageError(f"unknown command {cmd!r}")
    _emit(rep, args.output)
    return EXIT_OK if rep["pass"] else EXIT_MISMATCH


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _dispatch(args)
    except (UsageError, frobdual.DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DiscriminantError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
