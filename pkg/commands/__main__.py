# commands/__main__.py
"""Entry point: python -m commands <command> [flags]."""

import sys

from commands.default_cmdsets import cmd_dispatch

if __name__ == "__main__":
    sys.exit(cmd_dispatch())
