# This file is part of hamds3.
# hamds3 finds Hamilton cycles in sparse random graphs of minimum degree three with 2GREEDY and extension-rotation.
# Copyright (C) 2025  the hamds3 authors
#
# hamds3 is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# hamds3 is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from hamds3.errors import InputError
from hamds3.extend_rotate import ErConfig
from hamds3.two_greedy import GreedyConfig, epsilon

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """
    Every tunable of a pipeline run, with the defaults the CLI documents.
    """

    nu: int | None = None
    nu_exponent: float = 0.55
    retries: int = 3
    alpha: float = 0.1
    K: float = 1.0
    use_l0_cases: bool = True
    debug: bool = False
    resample_cap: int = 1000
    batch_factor: float = 10.0
    collect_trees: int = 64
    work_ceiling_factor: float = 64.0
    restricted_closing: bool = False

    def __post_init__(self):
        if self.nu is not None and self.nu < 2:
            raise InputError(f"nu must be at least 2, got {self.nu}")
        if self.retries < 0:
            raise InputError(f"retries must be non-negative, got {self.retries}")
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.K <= 0:
            raise InputError(f"K must be positive, got {self.K}")
        if self.nu_exponent <= 0:
            raise InputError(f"nu exponent must be positive, got {self.nu_exponent}")

    def with_params(self, **params) -> "RunConfig":
        """
        Return a new RunConfig with the specified parameters.
        None values are ignored so CLI options that were not given keep the current value.
        """
        known = {f.name for f in dataclasses.fields(self)}
        unknown = set(params) - known
        if unknown:
            raise InputError(f"Unknown config keys: {sorted(unknown)}")
        params = {k: v for k, v in params.items() if v is not None}
        return dataclasses.replace(self, **params)

    def without_params(self, *param_names: str) -> "RunConfig":
        """
        Return a new RunConfig with the specified parameters reset to their defaults.
        """
        defaults = RunConfig()
        return dataclasses.replace(
            self, **{name: getattr(defaults, name) for name in param_names}
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        return yaml.dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise InputError(f"Config file {path} does not exist.")
        with open(path, "r") as f:
            payload = yaml.safe_load(f) or {}
        if not isinstance(payload, dict):
            raise InputError(f"Config file {path} must hold a mapping, got {type(payload).__name__}")
        logger.debug(f"Loaded run config from {path}: {payload}")
        return cls().with_params(**payload)

    def epsilon(self, n: int) -> float:
        return epsilon(n, self.K)

    def nu_for(self, n: int) -> int:
        if self.nu is not None:
            return self.nu
        return max(2, math.ceil(n**self.nu_exponent))

    def l0(self, n: int, c: float) -> int:
        # L0 = (1/20) log_c n, floored at 4
        if c <= 1:
            return 4
        return max(4, math.floor(math.log(n) / (20 * math.log(c))))

    def early_cutoff(self, n: int) -> float:
        return n ** (1 - self.epsilon(n))

    def punctual_cutoff(self, m: int) -> float:
        return (1 - self.alpha) * m

    def greedy_config(self) -> GreedyConfig:
        return GreedyConfig(alpha=self.alpha, K=self.K, debug=self.debug)

    def er_config(self, n: int, c: float) -> ErConfig:
        return ErConfig(
            nu=self.nu_for(n),
            K=self.K,
            retries=self.retries,
            use_l0_cases=self.use_l0_cases,
            l0=self.l0(n, c),
            debug=self.debug,
            collect_trees=self.collect_trees,
            restricted_closing=self.restricted_closing,
            work_ceiling_factor=self.work_ceiling_factor,
        )
