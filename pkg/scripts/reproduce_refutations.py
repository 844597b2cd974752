"""Print the refutation reports for the eight-vertex instance and the 5-cycle."""
import sys

from circle3col.counterexamples import c5_phi, instance_c5, instance_ea, unger_replay, verify
from circle3col.solvers import format_trace


def main() -> int:
    ok = True
    for inst in (instance_ea(), instance_c5()):
        rep = verify(inst)
        print(f"== {inst.name}")
        print(rep.render())
        ok &= rep.overall
    inst = instance_c5()
    phi = c5_phi(inst)
    print("== c5 event log")
    print("\n".join(format_trace(phi, unger_replay(inst, phi).trace)))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
