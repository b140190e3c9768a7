import numpy as np
import pytest

from smartran.netmodel import ChannelState, Topology


def make_topology(num_users=2, num_rrs=1, num_subcarriers=1, max_power=10.0, noise_psd=1e-18,
                  bandwidth=1e6, l_max=2, serving=None):
    """Hand-built topology; positions are irrelevant when gains are supplied directly."""
    serving = np.arange(num_users) % num_rrs if serving is None else np.asarray(serving)
    return Topology(
        area_radius=500.0,
        rrs_positions=np.zeros((num_rrs, 2)),
        cell_radius=100.0,
        user_positions=np.zeros((num_users, 2)),
        serving_rrs=serving,
        num_subcarriers=num_subcarriers,
        subcarrier_bandwidth=bandwidth,
        max_power=max_power,
        noise_psd=noise_psd,
        max_users_per_carrier=l_max,
    )


def make_channel(gains, slot=0):
    return ChannelState(np.asarray(gains, dtype=float), slot)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
