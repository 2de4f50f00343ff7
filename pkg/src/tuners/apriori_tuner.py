from typing import Any, Dict
import os
import json
import logging

import numpy as np

import optuna
from optuna.samplers import TPESampler

from ..benchmarks.rates import rate_study


logger = logging.getLogger(__name__)


class AprioriTuner:
    """Calibrates the constant of the a-priori rule N = scale * delta^(-1/(2 mu + 1))
    by minimizing the mean rate-study error.
    """

    def __init__(
        self,
        hparams: Dict[str, Any],
        study_params: Dict[str, Any],
        direction: str,
        seed: int,
        num_trials: int,
        hparams_save_path: str,
    ) -> None:
        self.hparams = hparams
        self.study_params = study_params
        self.direction = direction
        self.seed = seed
        self.num_trials = num_trials
        self.hparams_save_path = hparams_save_path

    def __call__(self) -> Dict[str, Any]:
        study = optuna.create_study(
            direction=self.direction,
            sampler=TPESampler(seed=self.seed),
        )
        study.optimize(
            self.optuna_objective,
            n_trials=self.num_trials,
        )
        trial = study.best_trial
        best_score = trial.value
        best_params = trial.params
        logger.info(
            "Best score: %.6e",
            best_score,
        )
        logger.info(
            "Parameters: %s",
            best_params,
        )

        os.makedirs(
            self.hparams_save_path,
            exist_ok=True,
        )

        with open(f"{self.hparams_save_path}/best_params.json", "w") as json_file:
            json.dump(
                best_params,
                json_file,
            )
        return best_params

    def optuna_objective(
        self,
        trial: optuna.trial.Trial,
    ) -> float:
        params = dict()
        params["scale"] = trial.suggest_float(
            name="scale",
            low=self.hparams["scale"]["low"],
            high=self.hparams["scale"]["high"],
            log=self.hparams["scale"]["log"],
        )
        study = rate_study(
            scale=params["scale"],
            **self.study_params,
        )
        return float(np.mean(study.table["error"]))
