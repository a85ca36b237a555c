"""Golden-file support for the CLI script fixtures.

Each ``fixtures/NAME.tb`` script has a frozen ``fixtures/NAME.golden``
holding its exit code, standard output and standard error.  Regenerate
with ``python tests/golden.py --write`` and review the diff by hand.
"""

import io
import sys
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


def scripts():
    return sorted(FIXTURES.glob("*.tb"))


def render(script: Path) -> str:
    from termbridge.cli import run_script

    out, err = io.StringIO(), io.StringIO()
    code = run_script(str(script), out=out, err=err)
    return f"exit {code}\n--- stdout\n{out.getvalue()}--- stderr\n{err.getvalue()}"


def golden_path(script: Path) -> Path:
    return script.with_suffix(".golden")


if __name__ == "__main__":
    write = "--write" in sys.argv[1:]
    for script in scripts():
        text = render(script)
        if write:
            golden_path(script).write_text(text, encoding="utf-8")
        else:
            print(f"===== {script.name}\n{text}", end="")
