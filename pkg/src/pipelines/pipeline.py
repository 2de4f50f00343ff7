from typing import Any, Dict, List
import logging

import pandas as pd
from omegaconf import DictConfig

from ..utils.setup import SetUp
from ..utils.errors import NumericalError
from ..benchmarks.experiment import ErrorTrace, emit_csv, run_experiment, write_frame
from ..benchmarks.rates import rate_study
from ..benchmarks.tables import complexity_profile, filter_table
from ..filters.spectral_filters import (
    ContinuousFilter,
    DiscreteFilter,
    filter_sup,
    qualification_bound,
)


logger = logging.getLogger(__name__)


def _log_hparams(
    config: DictConfig,
    keys: List[str],
) -> Dict[str, Any]:
    logged_hparams = {}
    for key in keys:
        value = config[key]
        if not isinstance(value, (int, float, str, bool)):
            value = list(value)
        logged_hparams[key] = value
    logger.info(
        "Hyper-parameters: %s",
        logged_hparams,
    )
    return logged_hparams


def _log_traces(
    wandb_run: Any,
    traces: List[ErrorTrace],
) -> None:
    length = max(
        (len(trace) for trace in traces),
        default=0,
    )
    for k in range(length):
        metrics = {}
        for trace in traces:
            if k < len(trace):
                metrics[f"{trace.method.value}/error"] = float(trace.errors[k])
                metrics[f"{trace.method.value}/residual"] = float(trace.residuals[k])
        wandb_run.log(
            metrics,
            step=k,
        )


def run(
    config: DictConfig,
) -> List[ErrorTrace]:
    setup = SetUp(config)

    experiment_config = setup.get_experiment_config()
    problem = setup.get_problem()
    regularizers = setup.get_regularizers()
    stopping = setup.get_stopping()
    wandb_run = setup.get_wandb_run()

    logged_hparams = _log_hparams(
        config,
        [
            "kernel",
            "solution",
            "m",
            "noise",
            "normalize",
            "seed",
            "methods",
            "max_iters",
            "dt_policy",
            "tau",
        ],
    )
    wandb_run.config.update(logged_hparams)

    try:
        traces = run_experiment(
            experiment_config,
            regularizers=regularizers,
            problem=problem,
        )
        _log_traces(
            wandb_run,
            traces,
        )
        for trace in traces:
            if trace.failed:
                continue
            best = int(trace.errors.argmin())
            if problem.delta > 0:
                stop = int(
                    trace.iterations[stopping.stop_index(trace.residuals, problem.delta)]
                )
                logger.info(
                    "%s: minimal error %.6e at %d, %r stops at %d with error %.6e",
                    trace.method.value,
                    trace.errors[best],
                    best,
                    stopping,
                    stop,
                    trace.errors[stop],
                )
            else:
                logger.info(
                    "%s: minimal error %.6e at %d",
                    trace.method.value,
                    trace.errors[best],
                    best,
                )
        emit_csv(
            traces,
            config.out,
            record_wall_time=config.record_wall_time,
        )
        logger.info(
            "Error traces written to %s",
            config.out,
        )
        failures = [trace for trace in traces if trace.failed]
        if failures:
            raise NumericalError(
                "Methods failed: "
                + "; ".join(f"{trace.method.value} ({trace.failure})" for trace in failures)
            )
        wandb_run.alert(
            title="Run Complete",
            text="Benchmark run has successfully finished.",
            level="INFO",
        )
    except Exception as e:
        wandb_run.alert(
            title="Run Error",
            text="An error occurred during the benchmark run",
            level="ERROR",
        )
        raise e
    finally:
        wandb_run.finish()
    return traces


def filters(
    config: DictConfig,
) -> pd.DataFrame:
    setup = SetUp(config)
    wandb_run = setup.get_wandb_run()

    logged_hparams = _log_hparams(
        config,
        [
            "N",
            "T",
            "lambda_max",
            "num_points",
            "mu",
        ],
    )
    wandb_run.config.update(logged_hparams)

    try:
        table = filter_table(
            N=config.N,
            T=float(config.T),
            lambda_max=float(config.lambda_max),
            num_points=config.num_points,
        )
        write_frame(
            table,
            config.out,
        )
        continuous = ContinuousFilter(float(config.T))
        discrete = DiscreteFilter(config.N)
        summary = {
            "sup_continuous": filter_sup(continuous, float(config.lambda_max)),
            "sup_discrete": filter_sup(discrete, float(config.lambda_max)),
            "qualification_continuous": qualification_bound(
                continuous,
                float(config.mu),
                float(config.lambda_max),
            ),
            "qualification_discrete": qualification_bound(
                discrete,
                float(config.mu),
                float(config.lambda_max),
            ),
        }
        wandb_run.summary.update(summary)
        logger.info(
            "Filter summary: %s",
            summary,
        )
        wandb_run.alert(
            title="Filters Complete",
            text=f"Filter table written to {config.out}.",
            level="INFO",
        )
    except Exception as e:
        wandb_run.alert(
            title="Filters Error",
            text="An error occurred while tabulating filters",
            level="ERROR",
        )
        raise e
    finally:
        wandb_run.finish()
    return table


def rates(
    config: DictConfig,
) -> pd.DataFrame:
    setup = SetUp(config)
    wandb_run = setup.get_wandb_run()

    logged_hparams = _log_hparams(
        config,
        [
            "mu",
            "deltas",
            "rate_seeds",
            "rate_methods",
            "scale",
            "m",
            "sigma_min",
            "seed",
        ],
    )
    wandb_run.config.update(logged_hparams)

    try:
        study = rate_study(
            mu=float(config.mu),
            deltas=[float(delta) for delta in config.deltas],
            seeds=list(config.rate_seeds),
            methods=list(config.rate_methods),
            scale=float(config.scale),
            m=config.m,
            sigma_min=float(config.sigma_min),
            operator_seed=config.seed,
            progress=config.progress,
        )
        write_frame(
            study.table,
            config.out,
        )
        wandb_run.summary.update(
            {
                f"{method}/exponent": estimate.slope
                for method, estimate in study.exponents.items()
            }
        )
        wandb_run.alert(
            title="Rates Complete",
            text="Rate study has successfully finished.",
            level="INFO",
        )
    except Exception as e:
        wandb_run.alert(
            title="Rates Error",
            text="An error occurred during the rate study",
            level="ERROR",
        )
        raise e
    finally:
        wandb_run.finish()
    return study.table


def complexity(
    config: DictConfig,
) -> pd.DataFrame:
    setup = SetUp(config)
    wandb_run = setup.get_wandb_run()

    logged_hparams = _log_hparams(
        config,
        [
            "kernel",
            "sizes",
            "complexity_steps",
            "repeats",
        ],
    )
    wandb_run.config.update(logged_hparams)

    try:
        profile = complexity_profile(
            sizes=list(config.sizes),
            steps=config.complexity_steps,
            kernel=config.kernel,
            repeats=config.repeats,
        )
        write_frame(
            profile,
            config.out,
        )
        wandb_run.alert(
            title="Complexity Complete",
            text="Complexity profile has successfully finished.",
            level="INFO",
        )
    except Exception as e:
        wandb_run.alert(
            title="Complexity Error",
            text="An error occurred during the complexity profile",
            level="ERROR",
        )
        raise e
    finally:
        wandb_run.finish()
    return profile


def tune(
    config: DictConfig,
) -> Dict[str, Any]:
    setup = SetUp(config)
    tuner = setup.get_tuner()
    return tuner()
