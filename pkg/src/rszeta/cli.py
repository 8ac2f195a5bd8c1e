"""Command-line front end: JSON jobs, batch certification, golden corpus.

A job file holds {"command": ..., "payload": {...}, "seed": N}.  Every number
in the JSON interface is an exact string (rationals, root-of-unity exponents);
floats never appear.  Output is canonical (sorted keys, fixed separators), so
identical jobs produce byte-identical results.

Exit codes: 0 all verdicts pass; 1 a verdict or identity failed; 2 schema
error; 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .characters import MultChar
from .padic import IndexBoundExceeded, Mat2, MAX_COSET_INDEX, PrecisionError
from .reps import (
    PiPair,
    UnsupportedClass,
    l_factor_gl2,
    rep_from_json,
    rep_to_json,
    rs_l_factor,
)
from .scalars import PoleMismatch, RingSpec, membership
from .sums import gauss_brute, gauss_closed, partial_gauss
from .sums import epsilon_gl1
from .reps import epsilon_gl2
from .whittaker import eval_coset, eval_general
from .zeta import SchwartzFn, certify, ring_for_pair, trilinear, zeta_unfolded
from . import battery as battery_mod

COMMANDS = ("gauss-sum", "partial-gauss-sum", "epsilon", "whittaker-eval",
            "l-factor", "zeta", "certify", "trilinear", "battery")

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_SCHEMA = 2
EXIT_COMPUTE = 3

GOLDEN_DIR = Path(__file__).resolve().parents[2] / "tests" / "golden"


class SchemaError(ValueError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _need(payload: dict, *keys):
    for key in keys:
        if key not in payload:
            raise SchemaError(f"payload missing required field {key!r}")
    return [payload[k] for k in keys]


def _fraction(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational {s!r}: {exc}") from exc
    raise SchemaError(f"rationals must be strings or integers, got {type(s).__name__}")


def _chi(data) -> MultChar:
    if not isinstance(data, dict):
        raise SchemaError("character must be an object")
    try:
        return MultChar.from_json(data)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad character: {exc}") from exc


def _rep(data):
    if not isinstance(data, dict) or "class" not in data:
        raise SchemaError("representation must be an object with a 'class' field")
    try:
        return rep_from_json(data)
    except (AttributeError, KeyError, TypeError, ValueError,
            UnsupportedClass) as exc:
        raise SchemaError(f"bad representation: {exc}") from exc


def _mat(data) -> Mat2:
    try:
        return Mat2.from_json(data)
    except (TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"bad matrix: {exc}") from exc


def _datum(payload):
    prime, phi_data, g1, g2, r1, r2 = _need(
        payload, "prime", "phi", "g1", "g2", "rep1", "rep2")
    if not isinstance(prime, int) or prime < 2:
        raise SchemaError("prime must be an integer >= 2")
    try:
        phi = SchwartzFn.from_json(prime, phi_data)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad Schwartz function: {exc}") from exc
    pair = PiPair(_rep(r1), _rep(r2))
    if pair.prime != prime:
        raise SchemaError("representation prime differs from payload prime")
    return phi, (_mat(g1), _mat(g2)), pair


def _ring(pair, payload):
    spec = payload.get("ring", {})
    if not isinstance(spec, dict):
        raise SchemaError("ring must be an object")
    A = ring_for_pair(pair, extra_symbols=spec.get("extra_symbols", ()))
    if not spec.get("allow_sqrt", True):
        A = RingSpec(A.prime, A.root_order, allow_sqrt=False,
                     allowed_symbols=A.allowed_symbols,
                     allowed_constants=A.allowed_constants)
    return A


# ---------------------------------------------------------------------------
# command handlers: each returns (result, exit_code)


def _run_gauss(payload, opts):
    chi_data, x = _need(payload, "chi", "x")
    chi = _chi(chi_data)
    value = gauss_closed(chi, _fraction(x),
                         paper_convention=opts["paper_gauss_convention"])
    return {"value": value.to_json()}, EXIT_OK


def _run_partial_gauss(payload, opts):
    chi_data, ell, x = _need(payload, "chi", "ell", "x")
    if not isinstance(ell, int) or ell < 1:
        raise SchemaError("ell must be a positive integer")
    value = partial_gauss(_chi(chi_data), ell, _fraction(x))
    return {"value": value.to_json()}, EXIT_OK


def _run_epsilon(payload, opts):
    if "chi" in payload:
        value = epsilon_gl1(_chi(payload["chi"])).at_half()
    elif "rep" in payload:
        value = epsilon_gl2(_rep(payload["rep"]))
    else:
        raise SchemaError("payload needs 'chi' or 'rep'")
    return {"value": value.to_json()}, EXIT_OK


def _run_whittaker(payload, opts):
    pi = _rep(_need(payload, "rep")[0])
    if "matrix" in payload:
        sign = payload.get("psi_sign", 1)
        if sign not in (1, -1):
            raise SchemaError("psi_sign must be 1 or -1")
        value = eval_general(pi, _mat(payload["matrix"]), psi_sign=sign)
        return {"value": value.to_json()}, EXIT_OK
    t, k, v = _need(payload, "t", "k", "v")
    if not isinstance(t, int) or not isinstance(k, int):
        raise SchemaError("t and k must be integers")
    got = eval_coset(pi, t, k, _fraction(v))
    return {"value": got.value.to_json(),
            "support_flag": got.support_flag}, EXIT_OK


def _run_l_factor(payload, opts):
    if "rep1" in payload or "rep2" in payload:
        r1, r2 = _need(payload, "rep1", "rep2")
        pair = PiPair(_rep(r1), _rep(r2))
        return {"l_factor": rs_l_factor(pair).to_json()}, EXIT_OK
    pi = _rep(_need(payload, "rep")[0])
    return {"l_factor": l_factor_gl2(pi).to_json()}, EXIT_OK


def _run_zeta(payload, opts):
    phi, g, pair = _datum(payload)
    Z = zeta_unfolded(phi, g, pair, max_index=opts["max_index"])
    return {"zeta": Z.to_json()}, EXIT_OK


def _run_certify(payload, opts):
    phi, g, pair = _datum(payload)
    A = _ring(pair, payload)
    res = certify(phi, g, pair, A=A,
                  check_identity=payload.get("check_identity", True),
                  max_index=opts["max_index"])
    report = {"stab_volume": str(res.report.stab_volume),
              "required_ideal_generator": res.report.required_ideal_generator,
              "is_integral": res.report.is_integral}
    if res.refused:
        return {"refused": True, "report": report}, EXIT_VERDICT
    out = {
        "refused": False,
        "report": report,
        "l_factor": res.l_factor.to_json(),
        "phi_poly": res.phi_poly.to_json(),
        "verdicts": [[n, bool(v), v.certificate] for n, v in res.verdicts],
        "identity_check": res.identity_check,
        "section_integer_valued": res.section_integer_valued,
    }
    ok = (res.all_verdicts_pass
          and res.identity_check is not False
          and res.section_integer_valued is not False)
    return out, EXIT_OK if ok else EXIT_VERDICT


def _run_trilinear(payload, opts):
    phi, g, pair = _datum(payload)
    value = trilinear(phi, g, pair, max_index=opts["max_index"])
    in_ring = bool(membership(value, _ring(pair, payload)))
    return ({"value": value.to_json(), "in_ring": in_ring},
            EXIT_OK if in_ring else EXIT_VERDICT)


def _run_battery(payload, opts):
    p = payload.get("p", 3)
    if not isinstance(p, int) or p < 2:
        raise SchemaError("p must be an integer >= 2")
    n = payload.get("n", 10)
    if not isinstance(n, int) or n < 1:
        raise SchemaError("n must be a positive integer")
    pairs = payload.get("pairs", "all-supported")
    if pairs == "all-supported":
        kind_pairs = battery_mod.class_pairs()
    else:
        kind_pairs = []
        for item in pairs:
            if (not isinstance(item, (list, tuple)) or len(item) != 2
                    or any(k not in battery_mod.CLASS_NAMES for k in item)):
                raise SchemaError(f"bad class pair {item!r}")
            kind_pairs.append((item[0], item[1]))
    check_identity = bool(payload.get("check_identity", False))
    seed = opts["seed"]
    summary = {"seed": seed, "p": p, "n_per_pair": n, "pairs": {},
               "failures": []}
    total = passed = 0
    for kinds in kind_pairs:
        items = battery_mod.run_battery(seed, p, kinds, n,
                                        check_identity=check_identity)
        n_ok = sum(1 for it in items if it.ok)
        key = f"{kinds[0]}|{kinds[1]}"
        summary["pairs"][key] = {"run": len(items), "passed": n_ok}
        total += len(items)
        passed += n_ok
        for i, it in enumerate(items):
            if not it.ok:
                summary["failures"].append({
                    "pair": key, "index": i,
                    "renormalized": it.renormalized,
                    "membership_ok": it.membership_ok,
                    "identity_ok": it.identity_ok,
                    "failure": it.failure,
                })
    summary["total"] = total
    summary["passed"] = passed
    return summary, EXIT_OK if passed == total else EXIT_VERDICT


_HANDLERS = {
    "gauss-sum": _run_gauss,
    "partial-gauss-sum": _run_partial_gauss,
    "epsilon": _run_epsilon,
    "whittaker-eval": _run_whittaker,
    "l-factor": _run_l_factor,
    "zeta": _run_zeta,
    "certify": _run_certify,
    "trilinear": _run_trilinear,
    "battery": _run_battery,
}


def run(job: dict, seed: int | None = None, max_index: int = MAX_COSET_INDEX,
        paper_gauss_convention: bool = False) -> tuple[dict, int]:
    """Dispatch a job; returns (result, exit_code)."""
    try:
        if not isinstance(job, dict):
            raise SchemaError("job must be an object")
        command = job.get("command")
        if command not in COMMANDS:
            raise SchemaError(f"unknown command {command!r}")
        payload = job.get("payload", {})
        if not isinstance(payload, dict):
            raise SchemaError("payload must be an object")
        job_seed = job.get("seed", 0)
        if not isinstance(job_seed, int):
            raise SchemaError("seed must be an integer")
        opts = {
            "seed": seed if seed is not None else job_seed,
            "max_index": max_index,
            "paper_gauss_convention": paper_gauss_convention,
        }
        return _HANDLERS[command](payload, opts)
    except SchemaError as exc:
        return {"error": "schema", "message": str(exc)}, EXIT_SCHEMA
    except (UnsupportedClass, IndexBoundExceeded, PrecisionError, PoleMismatch,
            ArithmeticError, ValueError, KeyError, TypeError,
            AttributeError) as exc:
        return ({"error": "computation", "type": type(exc).__name__,
                 "message": str(exc)}, EXIT_COMPUTE)


def corpus_check(golden_dir: Path = GOLDEN_DIR) -> tuple[bool, list[str]]:
    """Re-run every golden job and byte-compare canonical JSON output."""
    diffs: list[str] = []
    files = sorted(golden_dir.glob("*.json"))
    if not files:
        return False, ["no golden files found"]
    for path in files:
        entry = json.loads(path.read_text())
        result, code = run(entry["job"],
                           max_index=entry.get("max_index", MAX_COSET_INDEX),
                           paper_gauss_convention=entry.get(
                               "paper_gauss_convention", False))
        got = canonical_json({"result": result, "exit_code": code})
        want = canonical_json({"result": entry["result"],
                               "exit_code": entry["exit_code"]})
        if got != want:
            diffs.append(f"{path.name}: expected {want!r} got {got!r}")
    return not diffs, diffs


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rszeta",
        description="Exact local Rankin-Selberg zeta integrals and "
                    "integrality certification.")
    parser.add_argument("--job", type=str, help="path to a JSON job file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the job seed")
    parser.add_argument("--out", type=str, default=None,
                        help="write the result JSON to this file")
    parser.add_argument("--max-index", type=int, default=MAX_COSET_INDEX,
                        help="coset-index bound for orbit enumerations")
    parser.add_argument("--paper-gauss-convention", action="store_true",
                        help="use the alternative printed constant in the "
                             "depth-zero Gauss-sum entry")
    parser.add_argument("--corpus-check", action="store_true",
                        help="re-run the golden corpus and byte-compare")
    args = parser.parse_args(argv)

    if args.corpus_check:
        ok, diffs = corpus_check()
        for line in diffs:
            print(line, file=sys.stderr)
        print("corpus: " + ("pass" if ok else "fail"))
        return EXIT_OK if ok else EXIT_VERDICT

    if not args.job:
        parser.print_usage(sys.stderr)
        return EXIT_SCHEMA
    try:
        job = json.loads(Path(args.job).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(canonical_json({"error": "schema", "message": str(exc)}), end="")
        return EXIT_SCHEMA
    result, code = run(job, seed=args.seed, max_index=args.max_index,
                       paper_gauss_convention=args.paper_gauss_convention)
    text = canonical_json(result)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
