"""Write the channel corpus used by the CLI examples into corpus/."""

from __future__ import annotations

import argparse
from pathlib import Path

from cqid.channels import save_channel
from cqid.instances import corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "corpus"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, obj in corpus().items():
        save_channel(obj, out / name)
        print(out / name)


if __name__ == "__main__":
    main()
