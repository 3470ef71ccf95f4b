from __future__ import annotations

import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.conf import lives_setting
from core.models import Run
from core.services.reports import Report, render
from core.services.runner import COMMANDS, FORMATS, RunConfig, UsageError, run_command

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Symulacje: mieszaniny, puryfikacja, singlet, CHSH, równoległe życia, audyt lokalności."

    def add_arguments(self, parser):
        parser.add_argument("subcommand", choices=COMMANDS)
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--rounds", type=int, default=None)
        parser.add_argument("--trials", type=int, default=None)
        parser.add_argument("--tol", type=float, default=None)
        parser.add_argument("--format", dest="fmt", choices=FORMATS, default="json")
        parser.add_argument("--out", default=None)
        parser.add_argument("--between", nargs=2, metavar=("A", "B"), default=None)
        parser.add_argument("--workers", type=int, default=None)
        parser.add_argument("--save", action="store_true", help="zapisz raport jako Run w bazie")

    def handle(self, *args, **opts):
        cfg = RunConfig(
            command=opts["subcommand"],
            seed=opts["seed"],
            rounds=opts["rounds"],
            trials=opts["trials"],
            tol=opts["tol"],
            fmt=opts["fmt"],
            out=opts["out"],
            between=tuple(opts["between"]) if opts["between"] else None,
            workers=opts["workers"] if opts["workers"] is not None else int(lives_setting("WORKERS")),
        )

        try:
            result, ms = run_command(cfg)
        except UsageError as e:
            raise CommandError(str(e), returncode=2)

        if isinstance(result, Report):
            text = render(result, cfg.fmt)
        else:
            text = result

        if cfg.out:
            Path(cfg.out).write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text, ending="")

        if not isinstance(result, Report):
            return

        if opts["save"]:
            run = Run.objects.create(
                command=cfg.command,
                seed=cfg.seed,
                config=cfg.echo(),
                report=result.to_dict(),
                passed=result.passed,
                time_ms=ms,
            )
            logger.info("saved run #%s", run.pk)

        if not result.passed:
            raise CommandError("failed checks: " + ", ".join(result.failing), returncode=1)
