import pytest

from reusesim import CostParams, FeatureVector, Task


@pytest.fixture
def flat_cost():
    """Latency-free parameters used by the worked cost examples."""
    return CostParams(
        edge_bandwidth=10.0,
        cloud_bandwidth=2.0,
        edge_capacity_rate=50.0,
        cloud_capacity_rate=500.0,
        lookup_cost=0.001,
        edge_hops=1,
        cloud_hops=6,
        per_hop_latency=0.0,
    )


def make_task(
    task_id=0,
    service="s",
    label="obj",
    values=(1.0, 2.0),
    input_size=8.0,
    output_size=2.0,
    complexity=100.0,
    arrival=0.0,
):
    return Task(
        id=task_id,
        service=service,
        object_label=label,
        features=FeatureVector(values),
        input_size=input_size,
        output_size=output_size,
        complexity=complexity,
        arrival_time=arrival,
    )


@pytest.fixture
def task_factory():
    return make_task
