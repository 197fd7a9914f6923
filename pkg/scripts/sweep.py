"""Print the machine-versus-oracle sweep over the bundled corpus.

    python3 scripts/sweep.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from harness import full_sweep  # noqa: E402


def main():
    report, seconds = full_sweep()
    for name, (tally, bad, hits) in report.items():
        print(f"{name:<13} {tally['equal']:>5} equal  {tally['differ']:>3} differ  "
              f"{tally['oracle-budget']:>3} budget  {hits:>4} parsed")
        for w in bad:
            print(f"    differs: {w}")
    print(f"{seconds:.1f} s")
    return 1 if any(bad for _, bad, _ in report.values()) else 0


if __name__ == "__main__":
    sys.exit(main())
