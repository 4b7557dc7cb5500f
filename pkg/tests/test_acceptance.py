"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""

import contextlib
import io
import random
import signal
import sys
import tempfile
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from generators import division_pair, entire_pair, flat_ok, random_pair  # noqa: E402
from hypercf import division  # noqa: E402
from hypercf.cli import cmd_gen, main  # noqa: E402
from hypercf.division import gpld, make_entire  # noqa: E402
from hypercf.errors import EntiretyCheckFailed, HcfError, NotReducible  # noqa: E402
from hypercf.gpmatrix import composed_lccm, const_rank, degree_violations, lccm_commutes  # noqa: E402
from hypercf.gpoly import GPoly, PolyD, RatD  # noqa: E402
from hypercf.oracle import check_identity  # noqa: E402
from hypercf.pipeline import FAULT_TARGETS, run_checks, run_pipeline  # noqa: E402
from hypercf.scalars import ConstField, DelayBasis, compare, set_precision  # noqa: E402
from hypercf.system import build_H, build_benchmark, random_system, strings_demo_matrix  # noqa: E402

BASIS = DelayBasis({"pi": "pi"})
PI = BASIS["pi"]
F = ConstField.rational


def _rat(num, den=(1,)):
    return RatD(PolyD(list(num)), PolyD(list(den)))


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


# --- 1. benchmark reproduction ------------------------------------------------------


def criterion_1():
    division._ROOT_CACHE.clear()
    t = time.perf_counter()
    res = run_pipeline(strings_demo_matrix())
    elapsed = time.perf_counter() - t
    (step,) = res.description.steps
    c = ConstField.exp(6 * PI - 20, 16)
    q = GPoly([(10 - PI, 1), (10 - 3 * PI, _rat([2, -1], [2, 1])),
               (-10 + 3 * PI, -_rat([2, 1], [-2, 1])), (-10 + PI, 1)])
    p = RatD(PolyD([c]), PolyD([-4, 0, 1]))
    hbar = GPoly([
        (PI, RatD(PolyD([0, -c]), PolyD([-2, 1]))),
        (-10 + 4 * PI, _rat([0, 4, 4, 1], [-2, 1])),
        (10 - 4 * PI, _rat([0, 4, -4, 1], [2, 1])),
        (-PI, RatD(PolyD([0, -c]), PolyD([2, 1]))),
    ])
    Hhat = res.description.Hhat
    parts = {
        "q": step.q.formal_equal(q),
        "p": step.p == p,
        "hbar": step.hbar.formal_equal(hbar),
        "Hhat=diag(1,-2)": Hhat == [[F(1), F(0)], [F(0), F(-2)]],
        "runtime<1s": elapsed < 1.0,
    }
    detail = ", ".join(f"{k} {'ok' if v else 'MISMATCH'}" for k, v in parts.items())
    detail += f"; computed Hhat = diag({Hhat[0][0]}, {Hhat[1][1]}), {elapsed:.2f}s"
    return all(parts.values()), detail


# --- 2. motivating failure -----------------------------------------------------------


def criterion_2():
    H = build_benchmark(PI, 10, 1, BASIS)
    rank = const_rank(composed_lccm(H))
    code, _, err = _cli("reduce", "--demo", "strings", "--no-reduce")
    ok = rank == 1 and code == 2 and "NotReducible" in err
    return ok, f"composed lccm rank {rank}; reduce --no-reduce exit {code}: {err.strip()}"


# --- 3. division property suite ------------------------------------------------------


def criterion_3(count=500):
    t = time.perf_counter()
    worst = 0
    bad_id = bad_deg = bad_den = equal_minus = 0
    for seed in range(count):
        x, y = division_pair(random.Random(seed))
        d = gpld(x, y)
        rep = check_identity(x, d.q * y + d.r, trials=64, tol="1e-20", seed=seed)
        worst = max(worst, rep.max_residual)
        bad_id += not rep.passed
        r = d.r
        if r:
            upper = compare(r.deg_sigma, y.deg_sigma) < 0 and compare(r.deg_plus, y.deg_plus) < 0
            lower = compare(r.deg_minus, y.deg_minus) > 0
            bad_deg += not (upper and lower)
            equal_minus += compare(r.deg_minus, y.deg_minus) == 0
        lc, tc = y.leading[1], y.trailing[1]
        bad_den += (lc ** d.k_plus * tc ** d.k_minus).num.monic() != d.raw_den
    elapsed = time.perf_counter() - t
    ok = not (bad_id or bad_deg or bad_den) and elapsed < 60
    return ok, (f"{count} pairs: identity failures {bad_id} (max residual {float(worst):.1e}), "
                f"degree postcondition failures {bad_deg} ({equal_minus} with deg- r = deg- y), "
                f"denominator mismatches {bad_den}, {elapsed:.1f}s")


# --- 4. entire-correction suite ------------------------------------------------------


def criterion_4(count=200):
    bad_eq = bad_cert = bad_proper = bad_numeric = 0
    worst = 0
    for seed in range(count):
        x, y = entire_pair(random.Random(seed))
        try:
            e = make_entire(gpld(x, y))
        except EntiretyCheckFailed:
            bad_cert += 1
            continue
        r = e.rstar
        eq = (r.deg_sigma == y.deg_sigma and r.deg_plus == y.deg_plus
              and r.deg_minus == y.deg_minus) if r else False
        bad_eq += not eq
        bad_cert += not e.certificate.passed
        worst = max(worst, e.certificate.max_residual)
        bad_proper += not all(c.deg <= 0 for _, c in e.qstar.terms)
        bad_numeric += e.numeric
    ok = not (bad_eq or bad_cert or bad_proper)
    return ok, (f"{count} quotients: degree equality failures {bad_eq}, entirety failures {bad_cert} "
                f"(max residual {float(worst):.1e}), improper qstar {bad_proper}, "
                f"numeric fallbacks {bad_numeric}")


# --- 5. pipeline property suite ------------------------------------------------------


class _Timeout(Exception):
    pass


def _alarm(*_):
    raise _Timeout()


def _dims(seed):
    rng = random.Random(10_000 + seed)
    n_minus = rng.randint(1, 4)
    return rng.randint(n_minus, 6), n_minus


def _system_outcome(seed, limit):
    n, n_minus = _dims(seed)
    sys_ = random_system(seed, n, n_minus)
    signal.signal(signal.SIGALRM, _alarm)
    signal.alarm(limit)
    try:
        res = run_pipeline(build_H(sys_))
        d = res.description
        problems = []
        if degree_violations(d.Hbar):
            problems.append("degree conditions")
        if not lccm_commutes(d.Hbar):
            problems.append("lccm composition")
        if const_rank(d.Hhat) < len(d.Hhat):
            problems.append("Hhat rank")
        if not all(r.passed for r in run_checks(res)):
            problems.append("oracle")
        if any(a.coeff.deg > 0 for b in d.dde.blocks for a in b.B):
            problems.append("input derivatives")
        return ("ok", d.classification) if not problems else ("bad", ", ".join(problems))
    except NotReducible:
        return "not-reducible", ""
    except HcfError as exc:
        return "error", type(exc).__name__
    except _Timeout:
        return "error", "timeout"
    finally:
        signal.alarm(0)


def criterion_5(count=50, limit=120):
    tally, notes = {}, []
    for seed in range(count):
        kind, info = _system_outcome(seed, limit)
        key = kind if kind != "ok" else f"ok/{info}"
        tally[key] = tally.get(key, 0) + 1
        if kind in ("bad", "error"):
            notes.append(f"seed {seed} {_dims(seed)}: {info}")
    ok = not any(k in ("bad", "error") for k in tally)
    summary = ", ".join(f"{k} {v}" for k, v in sorted(tally.items()))
    errors = {}
    for n in notes:
        name = n.rsplit(": ", 1)[1]
        errors[name] = errors.get(name, 0) + 1
    detail = f"{count} systems: {summary}"
    if errors:
        detail += "; failures by kind: " + ", ".join(f"{k} {v}" for k, v in sorted(errors.items()))
    return ok, detail


# --- 6. flat parametrization ---------------------------------------------------------


def criterion_6(count=100):
    bad = [seed for seed in range(count) if not flat_ok(*random_pair(random.Random(seed)))]
    return not bad, f"{count - len(bad)}/{count} pairs exact, column reduced and strictly proper"


# --- 7. fault detection --------------------------------------------------------------


def criterion_7(runs=100):
    flagged = 0
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(runs):
            target = FAULT_TARGETS[k % len(FAULT_TARGETS)]
            args = ["check", "--inject-fault", target, "--seed", str(k)]
            if k % 2 and target != "qstar":
                path = Path(tmp) / f"sys{k}.json"
                path.write_text(cmd_gen(k))
                args.append(str(path))
            else:
                args += ["--demo", "strings"]
            code, _, _ = _cli(*args)
            flagged += code == 3
    return flagged >= 0.99 * runs, f"{flagged}/{runs} perturbed runs flagged (relative size >= 1e-10)"


CRITERIA = [
    ("1 benchmark reproduction", criterion_1),
    ("2 motivating failure", criterion_2),
    ("3 division property suite", criterion_3),
    ("4 entire-correction suite", criterion_4),
    ("5 pipeline property suite", criterion_5),
    ("6 flat parametrization", criterion_6),
    ("7 fault detection", criterion_7),
]


def _line(name, fn):
    set_precision(50)
    ok, detail = fn()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}"


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, fn, capsys):
    ok, line = _line(name, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(name, fn) for name, fn in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
