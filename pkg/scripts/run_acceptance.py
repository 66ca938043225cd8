"""Print one pass/fail line per acceptance criterion; exit 1 if any fails."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from test_acceptance import CRITERIA, report  # noqa: E402


def main() -> int:
    failed = 0
    for k, crit in enumerate(CRITERIA, 1):
        ok, detail = crit()
        report(None, k, ok, detail)
        failed += not ok
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
