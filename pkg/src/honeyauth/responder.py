"""Risk scoring and graduated responses to honeyword events.

Actions are totally ordered: Allow < SilentLog < StepUpAuth < RestrictedToken
< Lockout.  Only honeyword events move a login above Allow.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from datetime import timedelta

from .errors import ConfigError


class ActionKind(enum.IntEnum):
    ALLOW = 0
    SILENT_LOG = 1
    STEP_UP_AUTH = 2
    RESTRICTED_TOKEN = 3
    LOCKOUT = 4


@dataclass(frozen=True, order=True)
class ResponseAction:
    kind: ActionKind
    duration: timedelta | None = field(default=None, compare=False)

    @property
    def name(self) -> str:
        return {
            ActionKind.ALLOW: "Allow",
            ActionKind.SILENT_LOG: "SilentLog",
            ActionKind.STEP_UP_AUTH: "StepUpAuth",
            ActionKind.RESTRICTED_TOKEN: "RestrictedToken",
            ActionKind.LOCKOUT: "Lockout",
        }[self.kind]

    def __str__(self):
        if self.duration is not None:
            return f"{self.name}({int(self.duration.total_seconds() // 60)}m)"
        return self.name


ALLOW = ResponseAction(ActionKind.ALLOW)
SILENT_LOG = ResponseAction(ActionKind.SILENT_LOG)
STEP_UP_AUTH = ResponseAction(ActionKind.STEP_UP_AUTH)
RESTRICTED_TOKEN = ResponseAction(ActionKind.RESTRICTED_TOKEN)


def _clamp01(x) -> float:
    return min(1.0, max(0.0, float(x)))


@dataclass(frozen=True)
class RiskContext:
    """Pre-computed login signals; scalars are clamped to [0, 1] (1 = worst)."""

    ip_reputation: float = 0.0
    geo_anomaly: float = 0.0
    device_mismatch: bool = False
    history_anomaly: float = 0.0

    def __post_init__(self):
        for name in ("ip_reputation", "geo_anomaly", "history_anomaly"):
            object.__setattr__(self, name, _clamp01(getattr(self, name)))
        object.__setattr__(self, "device_mismatch", bool(self.device_mismatch))

    @classmethod
    def from_dict(cls, d) -> "RiskContext":
        d = d or {}
        return cls(
            ip_reputation=d.get("ip_reputation", 0.0),
            geo_anomaly=d.get("geo_anomaly", 0.0),
            device_mismatch=d.get("device_mismatch", False),
            history_anomaly=d.get("history_anomaly", 0.0),
        )


@dataclass(frozen=True)
class ResponderConfig:
    w_ip: float = 0.25
    w_geo: float = 0.25
    w_device: float = 0.25
    w_history: float = 0.25
    honey_bonus: float = 0.4
    t_silent: float = 0.3
    t_stepup: float = 0.6
    t_restrict: float = 0.85
    window_hours: float = 24.0
    lockout_minutes: float = 15.0

    def __post_init__(self):
        for name in ("w_ip", "w_geo", "w_device", "w_history", "honey_bonus"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0 <= self.t_silent <= self.t_stepup <= self.t_restrict <= 1:
            raise ConfigError("thresholds must satisfy 0 <= t_silent <= t_stepup <= t_restrict <= 1")
        if self.window_hours < 0 or self.lockout_minutes < 0:
            raise ConfigError("window_hours and lockout_minutes must be >= 0")

    @classmethod
    def from_mapping(cls, section) -> "ResponderConfig":
        known = set(cls.__dataclass_fields__)
        values = {}
        for key, raw in section.items():
            if key not in known:
                raise ConfigError(f"[responder] unknown key {key!r}")
            try:
                values[key] = float(raw)
            except ValueError:
                raise ConfigError(f"[responder] {key} needs a number, got {raw!r}") from None
        return cls(**values)


def score_risk(ctx: RiskContext, honey_event: bool, cfg: ResponderConfig = ResponderConfig()) -> float:
    raw = (cfg.w_ip * ctx.ip_reputation + cfg.w_geo * ctx.geo_anomaly
           + cfg.w_device * float(ctx.device_mismatch) + cfg.w_history * ctx.history_anomaly
           + cfg.honey_bonus * bool(honey_event))
    return _clamp01(raw)


def lockout(cfg: ResponderConfig = ResponderConfig()) -> ResponseAction:
    return ResponseAction(ActionKind.LOCKOUT, timedelta(minutes=cfg.lockout_minutes))


def decide_action(risk: float, honey_event: bool, cfg: ResponderConfig = ResponderConfig()) -> ResponseAction:
    if not honey_event:
        return ALLOW
    if risk < cfg.t_silent:
        return SILENT_LOG
    if risk < cfg.t_stepup:
        return STEP_UP_AUTH
    if risk < cfg.t_restrict:
        return RESTRICTED_TOKEN
    return lockout(cfg)


def escalate(action: ResponseAction, history, now, cfg: ResponderConfig = ResponderConfig()) -> ResponseAction:
    """Raise ``action`` one level per prior honey event within the window.

    ``history`` holds datetimes of earlier honeyword events for the account.
    """
    window = timedelta(hours=cfg.window_hours)
    recent = sum(1 for t in history if timedelta(0) <= now - t <= window)
    level = min(int(action.kind) + recent, int(ActionKind.LOCKOUT))
    if level == action.kind:
        return action
    if level == ActionKind.LOCKOUT:
        return lockout(cfg)
    return ResponseAction(ActionKind(level))


MAX_HISTORY = int(ActionKind.LOCKOUT)


class Responder:
    """Stateful wrapper: per-uid honey history and active lockouts."""

    def __init__(self, cfg: ResponderConfig = ResponderConfig()):
        self.cfg = cfg
        self._history: dict[str, list] = {}
        self._locked_until: dict[str, object] = {}
        self._lock = threading.Lock()

    def history(self, uid) -> list:
        with self._lock:
            return list(self._history.get(uid, ()))

    def respond(self, uid: str, ctx: RiskContext, honey_event: bool, now) -> tuple[float, ResponseAction]:
        """Score, decide and escalate; records the event when ``honey_event``.

        Both paths run the same steps so the cost of a call does not reveal
        whether it was a honeyword event.
        """
        risk = score_risk(ctx, honey_event, self.cfg)
        base = decide_action(risk, honey_event, self.cfg)
        window = timedelta(hours=self.cfg.window_hours)
        with self._lock:
            prior = [t for t in self._history.get(uid, ()) if now - t <= window]
            escalated = escalate(base, prior, now, self.cfg)
            action = escalated if honey_event else base
            if honey_event:
                prior.append(now)
                if action.kind == ActionKind.LOCKOUT:
                    self._locked_until[uid] = now + action.duration
            # more events than levels above SilentLog cannot change the outcome
            self._history[uid] = prior[-MAX_HISTORY:]
            until = self._locked_until.get(uid)
            if until is not None and now < until and action.kind < ActionKind.LOCKOUT:
                action = ResponseAction(ActionKind.LOCKOUT, until - now)
        return risk, action
