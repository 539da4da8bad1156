# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from argparse import ArgumentParser, Namespace
from dataclasses import replace

from impuls import App, Pipeline, PipelineOptions, Resource, Task

from .analyze import RunAnalysis, analyze_resources
from .benchmark import RunBenchmark
from .config import OPTIONS, RunConfig, options_of, resolve
from .diagnostics import KnockoffDiagnosticsReport, diagnostics_resources
from .fetch import FetchFile, fetch_resources
from .simulate import Simulate

HELP = {
    "analyze": "fit a learner on a CSV and score its features",
    "simulate": "write a simulated dataset with its ground truth",
    "benchmark": "run importance methods over simulated replicates",
    "knockoff-diagnostics": "check the moments of sampled knockoffs",
    "fetch": "download a file, optionally verifying its SHA-256",
}


class CpiSeqApp(App):
    def add_arguments(self, parser: ArgumentParser) -> None:
        commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
        for command in OPTIONS:
            sub = commands.add_parser(command, help=HELP[command], description=HELP[command])
            sub.add_argument(
                "--config",
                metavar="FILE.json",
                help="JSON object with option values; explicit flags take precedence",
            )
            for option in options_of(command):
                option.add_to(sub)

    def prepare(self, args: Namespace, options: PipelineOptions) -> Pipeline:
        config = resolve(args.command, args)
        resources, tasks = self.plan(config)
        return Pipeline(
            options=replace(options, force_run=True),
            resources=resources,
            tasks=tasks,
        )

    @staticmethod
    def plan(config: RunConfig) -> tuple[dict[str, Resource], list[Task]]:
        match config.command:
            case "analyze":
                return analyze_resources(config), [RunAnalysis(config)]
            case "simulate":
                return {}, [Simulate(config)]
            case "benchmark":
                return {}, [RunBenchmark(config)]
            case "knockoff-diagnostics":
                return diagnostics_resources(config), [KnockoffDiagnosticsReport(config)]
            case "fetch":
                return fetch_resources(config["url"]), [
                    FetchFile(config["output"], config["sha256"])
                ]
            case other:
                raise ValueError(f"unknown command: {other!r}")
