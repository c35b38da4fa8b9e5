"""Tri-phase learning-rate schedule: linear warmup, hold, linear decay."""

from util.validation import ConfigError


def lr_at(
    step: float,
    total_steps: int,
    peak: float,
    warmup_frac: float = 0.4,
    hold_frac: float = 0.4,
) -> float:
    """
    Learning rate at `step`.

    Parameters:
        step (float): Position in [0, total_steps]; fractional steps are allowed
        total_steps (int): Length of the schedule, >= 1
        peak (float): Rate reached after warmup
        warmup_frac (float): Share of steps ramping 0 -> peak
        hold_frac (float): Share of steps held at peak

    Returns:
        float: Rate, 0 at both ends of the schedule
    """

    if total_steps < 1:
        raise ConfigError(f"total_steps must be >= 1, got {total_steps}")
    if not 0 <= step <= total_steps:
        raise ConfigError(f"step {step} outside [0, {total_steps}]")
    if warmup_frac < 0 or hold_frac < 0 or warmup_frac + hold_frac > 1:
        raise ConfigError("warmup_frac and hold_frac must be >= 0 and sum to <= 1")

    warmup_end = warmup_frac * total_steps
    hold_end = (warmup_frac + hold_frac) * total_steps
    if step < warmup_end:
        return peak * step / warmup_end
    if step <= hold_end:
        return peak
    return peak * (total_steps - step) / (total_steps - hold_end)
