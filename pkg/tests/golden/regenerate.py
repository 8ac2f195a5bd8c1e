"""Regenerate the golden corpus.  Run from the repository root:

    python3 tests/golden/regenerate.py

Each golden file stores a job together with its canonical result and exit
code; the corpus check re-runs the job and byte-compares.
"""

import json
from pathlib import Path

from rszeta.characters import MultChar
from rszeta.cli import run
from rszeta.padic import Mat2
from rszeta.reps import rep_to_json
from rszeta.scalars import CycScalar
from rszeta.reps import SteinbergUnrTwist, UnramifiedPS
from rszeta.zeta import SchwartzFn

HERE = Path(__file__).resolve().parent
P = 3


def ups_json():
    return rep_to_json(UnramifiedPS(P, CycScalar.zeta(P, 8, 1),
                                    CycScalar.zeta(P, 8, 7)))


def st_json():
    return rep_to_json(SteinbergUnrTwist(MultChar.trivial(P)))


def datum_payload(phi, g1, g2, rep1, rep2, **extra):
    payload = {"prime": P, "phi": phi.to_json(), "g1": g1.to_json(),
               "g2": g2.to_json(), "rep1": rep1, "rep2": rep2}
    payload.update(extra)
    return payload


def jobs():
    chi1 = MultChar(P, 1, 1).to_json()
    chi0 = MultChar.trivial(P).to_json()
    ident = Mat2.identity()
    yield "gauss_trivial", {"command": "gauss-sum",
                            "payload": {"chi": chi0, "x": "1"}}
    yield "gauss_ramified", {"command": "gauss-sum",
                             "payload": {"chi": chi1, "x": "1/3"}}
    yield "partial_gauss", {"command": "partial-gauss-sum",
                            "payload": {"chi": chi1, "ell": 1, "x": "1/9"}}
    yield "epsilon_gl1", {"command": "epsilon", "payload": {"chi": chi1}}
    yield "epsilon_gl2_steinberg", {"command": "epsilon",
                                    "payload": {"rep": st_json()}}
    yield "whittaker_coset", {"command": "whittaker-eval",
                              "payload": {"rep": st_json(),
                                          "t": -2, "k": 1, "v": "1"}}
    yield "whittaker_matrix", {"command": "whittaker-eval",
                               "payload": {"rep": ups_json(),
                                           "matrix": Mat2.diag(9, 1).to_json(),
                                           "psi_sign": 1}}
    yield "l_factor_single", {"command": "l-factor",
                              "payload": {"rep": ups_json()}}
    yield "l_factor_pair", {"command": "l-factor",
                            "payload": {"rep1": st_json(), "rep2": st_json()}}
    phi = SchwartzFn.unit_box(P)
    yield "zeta_classical", {"command": "zeta",
                             "payload": datum_payload(phi, ident, ident,
                                                      ups_json(), ups_json())}
    phi8 = SchwartzFn.unit_box(P, coeff=8)
    yield "certify_steinberg", {"command": "certify",
                                "payload": datum_payload(phi8, ident, ident,
                                                         st_json(), st_json())}
    yield "certify_refusal", {"command": "certify",
                              "payload": datum_payload(phi, ident, ident,
                                                       st_json(), st_json())}
    yield "trilinear_steinberg", {"command": "trilinear",
                                  "payload": datum_payload(phi8, ident, ident,
                                                           st_json(), st_json())}
    yield "battery_smoke", {"command": "battery", "seed": 11,
                            "payload": {"p": 3, "n": 2,
                                        "pairs": [["unramified", "steinberg"]]}}
    yield "schema_error", {"command": "no-such-command"}


def main():
    for name, job in jobs():
        result, code = run(job)
        path = HERE / f"{name}.json"
        path.write_text(json.dumps({"job": job, "result": result,
                                    "exit_code": code},
                                   sort_keys=True, indent=1) + "\n")
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    main()
