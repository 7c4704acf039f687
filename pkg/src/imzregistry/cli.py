"""Administrative command line: serve, simulate, reports, schedule and UID checks."""

from __future__ import annotations

import json
import os
import sys
from datetime import date

import click

from .analytics import (
    ALL_ZONES,
    DateWindow,
    coverage_report,
    default_wastage_rates,
    demand_forecast,
    dropout_rate,
    load_wastage_file,
    municipal_report,
    report_to_json,
)
from .config import load_config
from .errors import DomainError
from .schedule import default_schedule, load_schedule_file
from .simulator import SimConfig, calibrate_quit_hazard, run_simulation
from .sync import replay_log
from .uids import validate_uid


def _fail(exc: DomainError) -> None:
    click.echo(f"error [{exc.code.value}]: {exc.message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Child immunization registry tools."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def serve(config_path: str) -> None:
    """Run the HTTP service described by a config file."""
    import uvicorn

    from .service.app import build_central_from_config, create_app

    try:
        cfg = load_config(config_path)
        central, wastage = build_central_from_config(cfg)
    except DomainError as exc:
        _fail(exc)
        return
    app = create_app(central, wastage)
    uvicorn.run(app, host=cfg.listen_host, port=cfg.listen_port, log_level="warning")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None, help="Overrides the seed in the config file.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def simulate(config_path: str | None, seed: int | None, out_dir: str) -> None:
    """Run the synthetic-population pipeline and write reports to --out."""
    try:
        if config_path:
            with open(config_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            if seed is not None:
                doc["seed"] = seed
            cfg = SimConfig.from_payload(doc)
        else:
            cfg = SimConfig(seed=seed if seed is not None else 0, zones=(("Z1", 500),))
        os.makedirs(out_dir, exist_ok=True)
        # Write the event log alongside the reports so the `report` commands
        # can read the simulated registry back from the same directory.
        summary, central = run_simulation(
            cfg, out_dir=out_dir, log_path=os.path.join(out_dir, "events.log")
        )
        central.close()
    except DomainError as exc:
        _fail(exc)
        return
    click.echo(json.dumps(summary.to_payload(), sort_keys=True, indent=2))


def _registry_from_data_dir(data_dir: str):
    log_path = os.path.join(data_dir, "events.log")
    if not os.path.exists(log_path):
        click.echo(f"error: no event log at {log_path}", err=True)
        sys.exit(1)
    return replay_log(log_path, default_schedule()).registry


def _window(from_: str, to: str) -> DateWindow:
    return DateWindow(date.fromisoformat(from_), date.fromisoformat(to))


@main.group()
def report() -> None:
    """Generate reports from a service data directory."""


@report.command("coverage")
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--zone", default=ALL_ZONES, show_default=True)
@click.option("--from", "from_", required=True, help="Cohort start date (YYYY-MM-DD).")
@click.option("--to", required=True, help="Cohort end date (YYYY-MM-DD).")
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV instead of JSON.")
def report_coverage(data_dir: str, zone: str, from_: str, to: str, as_csv: bool) -> None:
    try:
        registry = _registry_from_data_dir(data_dir)
        rep = coverage_report(registry, zone, _window(from_, to), default_schedule())
    except DomainError as exc:
        _fail(exc)
        return
    click.echo(rep.to_csv() if as_csv else report_to_json(rep), nl=False)


@report.command("dropout")
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--zone", default=ALL_ZONES, show_default=True)
@click.option("--from", "from_", required=True)
@click.option("--to", required=True)
def report_dropout(data_dir: str, zone: str, from_: str, to: str) -> None:
    try:
        registry = _registry_from_data_dir(data_dir)
        rate = dropout_rate(registry, zone, _window(from_, to))
    except DomainError as exc:
        _fail(exc)
        return
    click.echo(json.dumps({"scope": zone, "from_dose": "BCG-1", "to_dose": "MEASLES-1", "rate": rate}, sort_keys=True))


@report.command("demand")
@click.option("--zone", default=ALL_ZONES, show_default=True)
@click.option("--cohort", required=True, type=int, help="Expected birth cohort size.")
@click.option("--wastage", "wastage_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--csv", "as_csv", is_flag=True)
def report_demand(zone: str, cohort: int, wastage_path: str | None, as_csv: bool) -> None:
    try:
        rates = load_wastage_file(wastage_path) if wastage_path else default_wastage_rates()
        rep = demand_forecast(zone, cohort, default_schedule(), rates)
    except DomainError as exc:
        _fail(exc)
        return
    click.echo(rep.to_csv() if as_csv else report_to_json(rep), nl=False)


@report.command("municipal")
@click.option("--data-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--zone", default=ALL_ZONES, show_default=True)
@click.option("--from", "from_", required=True)
@click.option("--to", required=True)
@click.option("--csv", "as_csv", is_flag=True)
def report_municipal(data_dir: str, zone: str, from_: str, to: str, as_csv: bool) -> None:
    try:
        registry = _registry_from_data_dir(data_dir)
        rep = municipal_report(registry, zone, _window(from_, to))
    except DomainError as exc:
        _fail(exc)
        return
    click.echo(rep.to_csv() if as_csv else report_to_json(rep), nl=False)


@main.group()
def schedule() -> None:
    """Immunization schedule tools."""


@schedule.command("validate")
@click.argument("schedule_file", type=click.Path(exists=True, dir_okay=False))
def schedule_validate(schedule_file: str) -> None:
    try:
        cfg = load_schedule_file(schedule_file)
    except DomainError as exc:
        _fail(exc)
        return
    click.echo(f"ok: {len(cfg.entries)} entries, fully-immunized rule covers {len(cfg.fully_immunized_doses)} doses by day {cfg.cutoff_days}")


@main.group()
def uid() -> None:
    """UID checksum tools."""


@uid.command("check")
@click.argument("candidate")
def uid_check(candidate: str) -> None:
    if validate_uid(candidate):
        click.echo(f"{candidate} VALID")
    else:
        click.echo(f"{candidate} INVALID")
        sys.exit(1)


@main.command("calibrate-hazard")
@click.option("--target", type=float, default=0.327, show_default=True)
@click.option("--n", type=int, default=20000, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
def calibrate_hazard(target: float, n: int, seed: int) -> None:
    """Bisect the partial-compliance quit hazard to hit a dropout target."""
    value = calibrate_quit_hazard(target=target, n=n, seed=seed)
    click.echo(json.dumps({"target": target, "n": n, "seed": seed, "partial_quit_hazard": value}))


if __name__ == "__main__":
    main()
