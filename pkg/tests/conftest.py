import random

from hypothesis import HealthCheck, settings

settings.register_profile(
    "seeded",
    max_examples=200,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("seeded")


def rng_for(seed):
    return random.Random(seed)
