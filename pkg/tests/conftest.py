import os
import random

import pytest


def seed_value():
    return int(os.environ.get("WTC_SEED", "20240811"))


@pytest.fixture()
def rng():
    return random.Random(seed_value())
