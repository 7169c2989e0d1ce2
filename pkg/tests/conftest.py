import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.models.domain import Box, DomainSpec, SubsetSpec
from src.services.semigroups.catalog import cubic_field, piecewise_branch_family, flow_family, linear_family


@pytest.fixture
def unit_interval():
    return DomainSpec.interval(-1.0, 1.0)


@pytest.fixture
def centered_subset(unit_interval):
    return SubsetSpec(unit_interval, pieces=(Box([-0.5], [0.5]),))


@pytest.fixture
def piecewise_family():
    return piecewise_branch_family()


@pytest.fixture
def decay_family():
    """F_t(x) = e^{-t} x on the euclidean ball of radius 2"""
    return linear_family([[-1.0]])


@pytest.fixture
def cubic_flow():
    return flow_family(cubic_field())


@pytest.fixture
def centered_subset_ball(decay_family):
    """[-1/2, 1/2] inside the radius-2 domain of the decay family"""
    return SubsetSpec(decay_family.domain, pieces=(Box([-0.5], [0.5]),))
