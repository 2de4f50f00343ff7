import dotenv

dotenv.load_dotenv(
    override=True,
)

import os
import sys
import warnings

os.environ["HYDRA_FULL_ERROR"] = "1"
warnings.filterwarnings("ignore")

import json

import hydra
from omegaconf import OmegaConf, DictConfig
from pydantic import ValidationError

from src.pipelines.pipeline import run, filters, rates, complexity, tune
from src.utils.errors import NumericalError


@hydra.main(
    config_path="configs/",
    config_name="dp_regularization.yaml",
)
def main(
    config: DictConfig,
) -> None:
    if config.is_tuned == "tuned":
        params = json.load(
            open(
                config.tuned_hparams_path,
                "rt",
                encoding="UTF-8",
            )
        )
        config = OmegaConf.merge(
            config,
            params,
        )
    elif config.is_tuned == "untuned":
        pass
    else:
        raise ValueError(f"Invalid is_tuned argument: {config.is_tuned}")

    if config.mode == "run":
        return run(config)
    elif config.mode == "filters":
        return filters(config)
    elif config.mode == "rates":
        return rates(config)
    elif config.mode == "complexity":
        return complexity(config)
    elif config.mode == "tune":
        return tune(config)
    else:
        raise ValueError(f"Invalid execution mode: {config.mode}")


if __name__ == "__main__":
    try:
        main()
    except NumericalError:
        sys.exit(2)
    except (ValueError, ValidationError):
        sys.exit(1)
