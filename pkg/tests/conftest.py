"""Shared test configuration.

Property-based tests use a fixed profile so runs are deterministic in CI and
never flagged for wall-clock deadlines on slow machines.
"""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")
