"""Run the study-fixture checks (dictionary size, algorithm agreement, grouping).

Same checks as ``structsel repro paper-rules``; exits non-zero on failure.
"""

import argparse
import sys

from structsel.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    sys.exit(main(["--threads", str(args.threads), "repro", "paper-rules"]))
