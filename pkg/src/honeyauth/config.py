"""INI-style configuration shared by the CLI subcommands.

    [policy]            same keys as a pwquality policy file
    [responder]         w_ip, w_geo, w_device, w_history, honey_bonus,
                        t_silent, t_stepup, t_restrict, window_hours,
                        lockout_minutes
    [kdf.<id>]          algorithm, memory_cost, time_cost, parallelism,
                        bench_rate, block_size

Unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .credstore import DEFAULT_PROFILES, KdfProfile
from .errors import ConfigError
from .policyguard import Policy, attach_wordlist, parse_policy
from .responder import ResponderConfig

_KDF_KEYS = {"algorithm", "memory_cost", "time_cost", "parallelism", "bench_rate", "block_size"}


@dataclass
class Config:
    policy: Policy = field(default_factory=Policy)
    responder: ResponderConfig = field(default_factory=ResponderConfig)
    profiles: dict[str, KdfProfile] = field(default_factory=lambda: dict(DEFAULT_PROFILES))


def _kdf_profile(pid, section) -> KdfProfile:
    unknown = set(section) - _KDF_KEYS
    if unknown:
        raise ConfigError(f"[kdf.{pid}] unknown keys {sorted(unknown)}")
    base = DEFAULT_PROFILES.get(pid)
    algorithm = section.get("algorithm", base.algorithm if base else None)
    if algorithm is None:
        raise ConfigError(f"[kdf.{pid}] needs an algorithm")

    def num(key, cast, default):
        if key not in section:
            if default is None:
                raise ConfigError(f"[kdf.{pid}] missing {key}")
            return default
        try:
            return cast(section[key])
        except ValueError:
            raise ConfigError(f"[kdf.{pid}] {key} must be numeric") from None

    return KdfProfile(
        id=pid,
        algorithm=algorithm,
        memory_cost=num("memory_cost", int, base.memory_cost if base else 0),
        time_cost=num("time_cost", int, base.time_cost if base else None),
        parallelism=num("parallelism", int, base.parallelism if base else 1),
        bench_rate=num("bench_rate", float, base.bench_rate if base else None),
        block_size=num("block_size", int, base.block_size if base else 8),
    )


def parse_config(text: str, base_dir=None) -> Config:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config: {exc}") from None
    cfg = Config()
    for name in parser.sections():
        section = dict(parser[name])
        if name == "policy":
            body = "\n".join(f"{k}={v}" for k, v in section.items())
            cfg.policy = attach_wordlist(parse_policy(body), base_dir)
        elif name == "responder":
            cfg.responder = ResponderConfig.from_mapping(section)
        elif name.startswith("kdf."):
            pid = name[4:]
            cfg.profiles[pid] = _kdf_profile(pid, section)
        else:
            raise ConfigError(f"unknown config section [{name}]")
    return cfg


def load_config(path) -> Config:
    if path is None:
        return Config()
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
