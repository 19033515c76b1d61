"""Regenerate the golden closure files shipped with the presets.

Goldens come from the hand-typed reference forms and the closed-form series,
never from the constructor, so comparing a constructed document against them
is an independent check.

    python3 scripts/make_goldens.py
"""

from pathlib import Path

from holodisc import reference_forms as ref
from holodisc.cli import dump_json, stencil_to_json, write_atomic
from holodisc.equivpde import closed_form_gamma_series

OUT = Path(__file__).resolve().parents[1] / "src" / "holodisc" / "presets" / "golden"


def golden(name, family, orders, closure, equivalent=None, note=""):
    doc = {"kind": "golden", "name": name, "family": family, "orders": orders, "note": note}
    if closure is not None:
        doc["closure"] = stencil_to_json(closure)
    if equivalent is not None:
        doc["equivalent_pde"] = {str(n): c.to_text() for n, c in sorted(equivalent.items())}
    write_atomic(OUT / f"{name}.json", dump_json(doc))
    print(OUT / f"{name}.json")


def below(stencil, var, order):
    return stencil.map_coeffs(lambda c: c.truncate(var, order))


def main():
    d6 = ref.diffusion_closure_gamma6()
    golden("diffusion_gamma3", "diffusion", {"gamma": 3}, ref.diffusion_closure_gamma3())
    golden("diffusion_gamma6", "diffusion", {"gamma": 6}, d6)
    golden("diffusion_gamma9", "diffusion", {"gamma": 9},
           closed_form_gamma_series("diffusion_asinh2", 9).folded(),
           equivalent=ref.diffusion_equivalent_gamma9(),
           note="closure from the asinh^2 closed form")
    golden("wave_gamma2", "wave", {"gamma": 2}, ref.wave_closure_gamma2())
    golden("wave_gamma5", "wave", {"gamma": 5},
           closed_form_gamma_series("wave_asinh", 5).folded(),
           note="closure from the asinh closed form; complete in every stencil width")
    golden("wave_gamma6", "wave", {"gamma": 6},
           closed_form_gamma_series("wave_asinh", 6).folded(),
           note="closure from the asinh closed form")
    d_theta0 = d6.subs(theta=0)
    golden("heterogeneous_gamma3", "heterogeneous", {"gamma": 3, "a": 3}, below(d_theta0, "gamma", 3))
    golden("heterogeneous_gamma6", "heterogeneous", {"gamma": 6, "a": 3},
           d_theta0 + ref.het_closure_extra())
    golden("heterogeneous_gamma7_equivalent", "heterogeneous", {"gamma": 7, "a": 3},
           None, equivalent=ref.het_equivalent_full_coupling(),
           note="equivalent PDE at gamma = 1 only")


if __name__ == "__main__":
    main()
