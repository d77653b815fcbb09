"""
Command Line Interface for the STAR-RIS secrecy simulator
"""

import json
from itertools import groupby
from typing import List, Optional, Sequence

import click
import structlog

from .models.experiment import ExperimentKind, ExperimentRecord
from .models.system import StarSecrecyError
from .services.experiment_service import run_experiment, solve_one
from .storage.record_writer import RecordWriter
from .utils.config import ConfigError, ConfigManager, LoggingConfig
from .utils.logging import configure_logging

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


@click.group()
@click.option('--config', '-c', help='Configuration file path')
@click.option('--debug', is_flag=True, help='Enable debug logging')
@click.option('--log-format', type=click.Choice(['json', 'console']), default=None,
              help='Log renderer; overrides the configuration file')
@click.pass_context
def cli(ctx, config, debug, log_format):
    """STAR-RIS assisted uplink NOMA secrecy simulator"""
    ctx.ensure_object(dict)
    manager = ConfigManager.from_file(config) if config else ConfigManager.from_env()
    app_config = manager.load_config()

    logging_config = app_config.logging
    if log_format:
        logging_config = LoggingConfig(level=logging_config.level, format=log_format)
    configure_logging(logging_config, debug=debug)

    ctx.obj['manager'] = manager
    logger.debug("CLI initialized", config=config or "defaults", debug=debug)


def _summaries(records: Sequence[ExperimentRecord]) -> List[str]:
    lines = []
    ordered = sorted(records, key=lambda r: (r.x, r.metric, r.scheme))
    for (x, metric), group in groupby(ordered, key=lambda r: (r.x, r.metric)):
        cells = [f"{r.scheme}={r.mean:.4g}±{r.std:.2g}" + (f" ({r.infeasible} infeasible)" if r.infeasible else "")
                 for r in group]
        lines.append(f"x={x:g} {metric}: " + "  ".join(cells))
    return lines


def _resolve_spec(ctx, kind: ExperimentKind, overrides, seed, trials, workers):
    manager: ConfigManager = ctx.obj['manager']
    if overrides:
        manager.apply_overrides(overrides)
    return manager.load_config().experiment_spec(kind, seed=seed, trials=trials, workers=workers)


def _experiment_command(kind: ExperimentKind):
    @click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=None, help='Experiment seed')
    @click.option('--trials', type=click.IntRange(min=1), default=None, help='Trials per sweep point')
    @click.option('--out', '-o', 'out_dir', default='results', show_default=True, help='Output directory')
    @click.option('--override', 'overrides', multiple=True, help='Config override key=value (repeatable)')
    @click.option('--workers', type=click.IntRange(min=1), default=None, help='Worker processes')
    @click.pass_context
    def command(ctx, seed, trials, out_dir, overrides, workers):
        spec = _resolve_spec(ctx, kind, overrides, seed, trials, workers)
        records = run_experiment(spec)
        path = RecordWriter(out_dir).write(kind.value, records, spec)
        for line in _summaries(records):
            click.echo(line)
        click.echo(f"Wrote {len(records)} records to {path}")
        return EXIT_OK

    command.__doc__ = f"Run the {kind.value} experiment and write <out>/{kind.value}.csv"
    return cli.command(name=kind.value)(command)


for _kind in ExperimentKind:
    if _kind is not ExperimentKind.SOLVE_ONE:
        _experiment_command(_kind)


@cli.command(name=ExperimentKind.SOLVE_ONE.value)
@click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=None, help='Experiment seed')
@click.option('--trial', type=click.IntRange(min=0), default=0, show_default=True, help='Channel realization index')
@click.option('--override', 'overrides', multiple=True, help='Config override key=value (repeatable)')
@click.pass_context
def solve_one_command(ctx, seed, trial, overrides):
    """Optimize one channel realization and print the SecrecyReport as JSON"""
    spec = _resolve_spec(ctx, ExperimentKind.SOLVE_ONE, overrides, seed, None, None)
    report = solve_one(spec, trial)
    click.echo(json.dumps(report.model_dump(mode="json"), sort_keys=True))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main CLI entry point

    Returns:
        0 on success, 2 on configuration or usage errors, 1 on runtime errors
    """
    try:
        result = cli.main(args=list(argv) if argv is not None else None,
                          prog_name="star-secrecy", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted", err=True)
        return EXIT_RUNTIME
    except ConfigError as e:
        click.echo(f"Configuration error: {e}", err=True)
        return EXIT_CONFIG
    except StarSecrecyError as e:
        logger.error("Command failed", error=str(e), error_type=type(e).__name__)
        click.echo(f"Error: {e}", err=True)
        return EXIT_RUNTIME
    return result if isinstance(result, int) else EXIT_OK


if __name__ == '__main__':
    raise SystemExit(main())
