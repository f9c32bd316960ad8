import pytest

from src.errors import ResourceLimitError
from src.schemas.schemas import GraphConfig
from src.schemas.schemas import PotentialConfig
from src.services.battery import build_scenario
from src.settings import ProjectSettings


def test_vertex_cap_is_read_from_environment(monkeypatch):
    monkeypatch.setenv("LPS_VERTEX_CAP", "123")

    assert ProjectSettings().VERTEX_CAP == 123


def test_vertex_cap_default(monkeypatch):
    monkeypatch.delenv("LPS_VERTEX_CAP", raising=False)

    assert ProjectSettings(_env_file=None).VERTEX_CAP == 4000


def test_scenario_uses_project_vertex_cap(monkeypatch):
    monkeypatch.setattr("src.services.battery.project_settings", ProjectSettings(VERTEX_CAP=10))

    with pytest.raises(ResourceLimitError) as caught:
        build_scenario(graph_config=GraphConfig(builder="grid", size=4), potential_config=PotentialConfig())

    assert caught.value.cap == 10
