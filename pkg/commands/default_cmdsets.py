"""
Command sets

All bikegeo commands are grouped in a cmdset. `cmd_dispatch` looks the
first argument up in the `BikeCmdSet` (by key or alias) and runs it.

To create new commands to populate the cmdset, see
`commands/command.py`.

Exit codes: 0 on success, 2 on validation errors (including unknown flags),
3 on numerical-diagnostic failures.
"""

from __future__ import annotations

import logging
import sys
from typing import Dict, List, Optional, Sequence

from commands.akns import CmdAkns
from commands.command import Command
from commands.correspond import CmdCorrespond
from commands.integrals import CmdIntegrals
from commands.monodromy import CmdMonodromy
from commands.planimeter import CmdPlanimeter
from commands.rolling import CmdRolling
from commands.selftest import CmdSelftest
from commands.simulate import CmdSimulate
from commands.wegner import CmdWegner
from commands.zindler import CmdZindler
from utils.errors import NUMERICAL_FAILURES, ValidationError, as_numerical_error
from utils.run_config import resolve_setting

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class BikeCmdSet:
    """
    The `BikeCmdSet` holds every pipeline command available from the
    command line.
    """

    key = "DefaultBike"

    def __init__(self):
        self.commands: List[Command] = []
        self.at_cmdset_creation()

    def add(self, cmd: Command):
        self.commands.append(cmd)

    def at_cmdset_creation(self):
        """
        Populates the cmdset
        """
        self.add(CmdSimulate())
        self.add(CmdMonodromy())
        self.add(CmdPlanimeter())
        self.add(CmdCorrespond())
        self.add(CmdZindler())
        self.add(CmdIntegrals())
        self.add(CmdAkns())
        self.add(CmdWegner())
        self.add(CmdRolling())
        self.add(CmdSelftest())

    def lookup(self) -> Dict[str, Command]:
        table = {}
        for cmd in self.commands:
            table[cmd.key] = cmd
            for alias in cmd.aliases:
                table[alias] = cmd
        return table

    def get(self, name: str) -> Optional[Command]:
        return self.lookup().get(name)


def _usage(cmdset: BikeCmdSet) -> str:
    lines = ["usage: bikegeo <command> [flags]", "", "commands:"]
    for cmd in cmdset.commands:
        summary = (cmd.__doc__ or "").strip().splitlines()[0]
        lines.append(f"  {cmd.key:<11} {summary}")
    return "\n".join(lines)


def configure_logging():
    level = resolve_setting("BIKEGEO_LOG_LEVEL").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def cmd_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command from argv; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    configure_logging()
    cmdset = BikeCmdSet()
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(_usage(cmdset))
        return EXIT_OK if argv else EXIT_VALIDATION
    cmd = cmdset.get(argv[0])
    if cmd is None:
        print(f"bikegeo: unknown command '{argv[0]}'\n\n{_usage(cmdset)}", file=sys.stderr)
        return EXIT_VALIDATION
    cmd = type(cmd)()
    try:
        artifacts = cmd.run(argv[1:])
    except SystemExit as exc:
        # argparse: --help exits 0, usage errors exit 2
        return int(exc.code or 0)
    except ValidationError as exc:
        print(f"bikegeo {cmd.key}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_FAILURES as exc:
        print(f"bikegeo {cmd.key}: {as_numerical_error(exc)}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in artifacts:
        logger.info(f"[CLI] wrote {path}")
    return EXIT_OK
