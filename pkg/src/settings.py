import os
from typing import Tuple

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic_settings import BaseSettings
from pydantic_settings import SettingsConfigDict

PROJECT_ROOT: str = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class ProjectSettings(BaseSettings):
    """
    Класс, представляющий собой конфигурацию проекта, переопределяемую через окружение

    Атрибуты:
    VERTEX_CAP (int): Максимальное число вершин, для которого выполняется плотное
    спектральное разложение (переменная окружения LPS_VERTEX_CAP)
    """

    VERTEX_CAP: int = 4000

    model_config = SettingsConfigDict(
        env_prefix="LPS_",
        env_file=os.path.join(PROJECT_ROOT, ".env"),
        extra="ignore",
    )


class NumericDefaults(BaseModel):
    """
    Численные значения по умолчанию: допуски, пороги и параметры сеток. Из окружения
    не читаются

    Атрибуты:
    ORACLE_CAP (int): Предел числа вершин для точного оракула Грама;
    KERNEL_TOLERANCE_FACTOR (float): Порог ядра относительно λ_max;
    TIME_NODES (int): Число узлов логарифмической сетки по времени;
    T_MIN_FACTOR (float): t_min = T_MIN_FACTOR / λ_max;
    T_MAX_FACTOR (float): t_max = T_MAX_FACTOR / λ_min⁺;
    STABILITY_FLOOR (float): Нижний порог для проверок нижних оценок;
    REFINEMENT_GROWTH (float): Порог роста за одно измельчение (радиальный контрпример);
    DOUBLING_GROWTH (float): Порог роста за удвоение размера (связная сумма);
    FLAT_CORRIDOR (float): Допустимое отклонение контрольных серий;
    SIZE_CORRIDOR (float): Допустимая вариация констант по размерам сетки;
    STABLE_NORM_CORRIDOR (float): Допустимая вариация ‖u‖ и ‖g‖ в радиальном контрпримере;
    KAHANE_CORRIDOR (Tuple[float, float]): Коридор отношений двух форм R-ограниченности;
    EXACT_TOLERANCE (float): Допуск точных утверждений;
    GRID_STABILITY (float): Допустимое изменение при удвоении сетки по времени
    """

    ORACLE_CAP: int = 400
    KERNEL_TOLERANCE_FACTOR: float = 1e-10
    TIME_NODES: int = 400
    T_MIN_FACTOR: float = 1e-6
    T_MAX_FACTOR: float = 40.0
    STABILITY_FLOOR: float = 1e-3
    REFINEMENT_GROWTH: float = 0.15
    DOUBLING_GROWTH: float = 0.10
    FLAT_CORRIDOR: float = 0.30
    SIZE_CORRIDOR: float = 0.50
    STABLE_NORM_CORRIDOR: float = 0.10
    KAHANE_CORRIDOR: Tuple[float, float] = (0.25, 4.0)
    EXACT_TOLERANCE: float = 1e-6
    GRID_STABILITY: float = 0.02

    model_config = ConfigDict(frozen=True)


project_settings = ProjectSettings()
numeric_defaults = NumericDefaults()
