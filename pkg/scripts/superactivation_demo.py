"""Run the dichotomy and super-activation analysis on the built-in AVC wiretap pairs."""

from __future__ import annotations

from cqid.instances import superactivation_pairs
from cqid.secrecy import dichotomy_avwc, superactivation_check


def main() -> None:
    first, second = superactivation_pairs()
    for name, wp in (("first", first), ("second", second)):
        rep = dichotomy_avwc(wp)
        print(f"{name}: C_SID = {rep.sid_capacity:.6g} ({rep.secrecy_positive})")
        for line in rep.rationale:
            print("   ", line)
    rep = superactivation_check(first, second)
    print(f"tensor product verdict: {rep.verdict}")
    for line in rep.reasons:
        print("   ", line)


if __name__ == "__main__":
    main()
