from typing import Any, Dict
import os

from omegaconf import DictConfig
from hydra.utils import instantiate

from ..benchmarks.experiment import ExperimentConfig, MethodKind
from ..benchmarks.parameter_choice import DiscrepancyPrinciple
from ..problems.benchmark_problem import InverseProblem


class SetUp:
    def __init__(
        self,
        config: DictConfig,
    ) -> None:
        self.config = config

    def get_experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            kernel=self.config.kernel,
            solution=self.config.solution,
            m=self.config.m,
            noise_fraction=self.config.noise,
            seed=self.config.seed,
            methods=list(self.config.methods),
            max_iters=self.config.max_iters,
            dt_policy=self.config.dt_policy,
            normalize=self.config.normalize,
            n_jobs=self.config.n_jobs,
            record_wall_time=self.config.record_wall_time,
        )

    def get_problem(self) -> InverseProblem:
        problem: InverseProblem = instantiate(
            self.config.problem,
        )
        return problem

    def get_regularizers(self) -> Dict[MethodKind, Any]:
        regularizers = {}
        for method in self.config.methods:
            regularizers[MethodKind(method)] = instantiate(
                self.config.regularizers[method],
            )
        return regularizers

    def get_stopping(self) -> DiscrepancyPrinciple:
        stopping: DiscrepancyPrinciple = instantiate(
            self.config.stopping,
        )
        return stopping

    def get_tuner(self) -> Any:
        return instantiate(
            self.config.tuner,
            _convert_="partial",
        )

    def get_wandb_run(self) -> Any:
        os.makedirs(
            self.config.logger.wandb.dir,
            exist_ok=True,
        )
        return instantiate(
            self.config.logger.wandb,
        )
