"""
Tipos de domínio: distribuições, modelo BN-S refinado e teste sequencial.

Convenção da inversa gaussiana: `mean` é a média μ e `scale` é o parâmetro de forma
λ_IG, de modo que a variância vale μ³/λ_IG. "Fator de escala 1" significa λ_IG = 1.
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from src.utils.validators import ValidadorNumerico, ValidationError


@dataclass(frozen=True)
class InverseGaussianParams:
    mean: float
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "mean", ValidadorNumerico.validar_positivo("Média da IG", self.mean))
        object.__setattr__(self, "scale", ValidadorNumerico.validar_positivo("Escala da IG", self.scale))

    @property
    def variance(self) -> float:
        return self.mean ** 3 / self.scale

    @property
    def second_moment(self) -> float:
        return self.mean ** 2 + self.variance

    @property
    def mgf_bound(self) -> float:
        """Supremo do domínio da geradora de momentos: λ/(2μ²)"""
        return self.scale / (2.0 * self.mean ** 2)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_subdivisions: int = 2 ** 20

    def __post_init__(self):
        ValidadorNumerico.validar_positivo("abs_tol", self.abs_tol)
        ValidadorNumerico.validar_positivo("rel_tol", self.rel_tol)
        ValidadorNumerico.validar_inteiro_positivo("max_subdivisions", self.max_subdivisions)


# ---------------------------------------------------------------------------------
# BN-S refinado
# ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class BnsParams:
    mu: float
    beta: float
    rho: float
    lam: float
    theta: float
    sigma0_sq: float

    def __post_init__(self):
        ValidadorNumerico.validar_real("mu", self.mu)
        ValidadorNumerico.validar_real("beta", self.beta)
        ValidadorNumerico.validar_positivo("lambda", self.lam)
        ValidadorNumerico.validar_intervalo("theta", self.theta, 0.0, 1.0)
        ValidadorNumerico.validar_positivo("sigma0_sq", self.sigma0_sq)

        if ValidadorNumerico.validar_real("rho", self.rho) > 0:
            raise ValidationError("rho deve ser menor ou igual a zero")

    def com(self, **mudancas) -> "BnsParams":
        dados = asdict(self)
        dados.update(mudancas)
        return BnsParams(**dados)


@dataclass(frozen=True)
class SubordinatorSpec:
    """Subordinador Poisson composto com marcas IG; `rate` = saltos por unidade de tempo"""
    params: InverseGaussianParams
    rate: float
    kind: str = "inverse-gaussian-compound"

    def __post_init__(self):
        ValidadorNumerico.validar_positivo("Taxa do subordinador", self.rate)

        if self.kind != "inverse-gaussian-compound":
            raise ValidationError(f"Tipo de subordinador desconhecido: {self.kind}")

    @property
    def intensity(self) -> float:
        return self.rate * self.params.mean

    @property
    def variance_unit(self) -> float:
        """Var(Z_1) = taxa · E[J²]"""
        return self.rate * self.params.second_moment


@dataclass(frozen=True)
class PathGrid:
    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        ValidadorNumerico.validar_real("t0", self.t0)
        ValidadorNumerico.validar_real("t1", self.t1)
        ValidadorNumerico.validar_inteiro_positivo("steps", self.steps)

        if self.t1 <= self.t0:
            raise ValidationError("t1 deve ser maior que t0")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.steps

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps + 1)


@dataclass(eq=False)
class JumpStream:
    """Realização dos saltos de Z e Z^(b) em tempo real (já com a mudança de tempo λt)"""
    times_z: np.ndarray
    sizes_z: np.ndarray
    times_zb: np.ndarray
    sizes_zb: np.ndarray

    @classmethod
    def vazio(cls) -> "JumpStream":
        vazio = np.zeros(0)
        return cls(vazio, vazio, vazio, vazio)

    def efetivos(self, theta: float):
        """Tempos ordenados e tamanhos ponderados de (1−θ)dZ + θdZ^(b)"""
        tempos = np.concatenate([self.times_z, self.times_zb])
        tamanhos = np.concatenate([(1.0 - theta) * self.sizes_z, theta * self.sizes_zb])
        ordem = np.argsort(tempos, kind="stable")
        return tempos[ordem], tamanhos[ordem]


@dataclass(eq=False)
class BnsPaths:
    """Trajetórias no grid: x e sigma_sq têm forma (n_paths, steps + 1)"""
    times: np.ndarray
    x: np.ndarray
    sigma_sq: np.ndarray
    jumps_sq_z: np.ndarray
    jumps_sq_zb: np.ndarray
    streams: Optional[list] = None

    @property
    def n_paths(self) -> int:
        return self.x.shape[0]


# ---------------------------------------------------------------------------------
# Teste sequencial
# ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class JumpHypothesis:
    a: float
    nu: InverseGaussianParams
    sigma: float

    def __post_init__(self):
        ValidadorNumerico.validar_nao_negativo("Inclinação a", self.a)
        ValidadorNumerico.validar_positivo("sigma", self.sigma)


@dataclass(frozen=True)
class GeneratorCoefficients:
    beta: float
    m: float
    gamma: float
    C: float
    M: float
    B: float

    def __post_init__(self):
        for nome in ("beta", "m", "gamma", "C", "M", "B"):
            if not math.isfinite(getattr(self, nome)):
                raise ValidationError(f"Coeficiente {nome} não é finito")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DecisionRule:
    l: float
    r: float
    alpha0: float = 0.1

    def __post_init__(self):
        ValidadorNumerico.validar_intervalo("alpha0", self.alpha0, 0.0, 1.0, aberto=True)

        if not (ValidadorNumerico.validar_real("l", self.l) < 0 < ValidadorNumerico.validar_real("r", self.r)):
            raise ValidationError("O intervalo de decisão deve satisfazer l < 0 < r")


@dataclass(frozen=True)
class BoundarySolution:
    """r_f e r_g podem ser None quando o envelope correspondente não tem raiz (modo tolerante)"""
    r_f: Optional[float]
    r_g: Optional[float]
    r: float


@dataclass(frozen=True)
class ExitResult:
    exits_right: int
    exits_left: int
    no_exit: int
    n_sims: int

    def __post_init__(self):
        if self.exits_right + self.exits_left + self.no_exit != self.n_sims:
            raise ValidationError("Contagens de saída não somam o número de simulações")

    @property
    def right_exit_freq(self) -> int:
        return self.exits_right


TERMOS_LOG_GAMMA = ("squared_log", "log_of_square")

# generator: saltos +y ~ K com deriva −C; triplet: deriva γ e saltos −y
DINAMICAS_U = ("generator", "triplet")


@dataclass(frozen=True)
class DetectorConfig:
    """Controles do detector de regime de saltos (um por janela)"""
    alpha0: float = 0.1
    p_star: int = 8
    n_sims: int = 10
    t_max: float = 10.0
    dt: float = 1e-3
    a_max: float = 50.0
    r_max: float = 50.0
    left: float = -1.0
    gamma_log_term: str = "squared_log"
    dynamics: str = "generator"
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    workers: int = 1

    def __post_init__(self):
        ValidadorNumerico.validar_intervalo("alpha0", self.alpha0, 0.0, 1.0, aberto=True)
        n_sims = ValidadorNumerico.validar_inteiro_positivo("n_sims", self.n_sims)
        p_star = ValidadorNumerico.validar_inteiro_positivo("p_star", self.p_star)
        ValidadorNumerico.validar_positivo("t_max", self.t_max)
        ValidadorNumerico.validar_positivo("dt", self.dt)
        ValidadorNumerico.validar_positivo("a_max", self.a_max)
        ValidadorNumerico.validar_positivo("r_max", self.r_max)
        ValidadorNumerico.validar_inteiro_positivo("workers", self.workers)

        if p_star > n_sims:
            raise ValidationError("p_star deve estar entre 1 e n_sims")

        if self.dt > self.t_max:
            raise ValidationError("dt não pode ser maior que t_max")

        if ValidadorNumerico.validar_real("left", self.left) >= 0:
            raise ValidationError("A fronteira esquerda deve ser negativa")

        if self.gamma_log_term not in TERMOS_LOG_GAMMA:
            raise ValidationError(f"gamma_log_term deve ser um de {TERMOS_LOG_GAMMA}")

        if self.dynamics not in DINAMICAS_U:
            raise ValidationError(f"dynamics deve ser um de {DINAMICAS_U}")

    def com(self, **mudancas) -> "DetectorConfig":
        dados = {nome: getattr(self, nome) for nome in self.__dataclass_fields__}
        dados.update(mudancas)
        return DetectorConfig(**dados)


@dataclass
class DetectionRecord:
    """Um registro por janela, no formato JSON exportado por `detect`"""
    period_start_index: int
    a_hat: float
    sigma: float
    beta: Optional[float]
    gamma: Optional[float]
    C: Optional[float]
    M: Optional[float]
    B: Optional[float]
    r_f: Optional[float]
    r_g: Optional[float]
    r: Optional[float]
    right_exits: int
    left_exits: int
    no_exits: int
    label: int

    @property
    def right_exit_freq(self) -> int:
        return self.right_exits

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------------
# Estudo de simulação
# ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class StudySpec:
    drift: float
    diffusion: float
    jump_params: InverseGaussianParams
    tilt: float = 0.0
    n_processes: int = 100
    n_periods_each: int = 30
    start_value: float = 100.0
    jump_rate: float = 1.0
    compounding: str = "additive"

    def __post_init__(self):
        ValidadorNumerico.validar_real("drift", self.drift)
        ValidadorNumerico.validar_positivo("diffusion", self.diffusion)
        ValidadorNumerico.validar_nao_negativo("tilt", self.tilt)
        ValidadorNumerico.validar_inteiro_positivo("n_processes", self.n_processes)
        ValidadorNumerico.validar_inteiro_positivo("n_periods_each", self.n_periods_each)
        ValidadorNumerico.validar_positivo("start_value", self.start_value)
        ValidadorNumerico.validar_nao_negativo("jump_rate", self.jump_rate)

        if self.compounding not in ("additive", "percent"):
            raise ValidationError("compounding deve ser 'additive' ou 'percent'")

    @property
    def taxa_saltos(self) -> float:
        """Massa de jump_rate·(1 + tilt·x)ν: a inclinação também acrescenta saltos"""
        return self.jump_rate * (1.0 + self.tilt * self.jump_params.mean)


@dataclass(frozen=True)
class StudyRow:
    classe: str
    method: str
    correct: int
    total: int
    seed: int

    def to_dict(self) -> dict:
        return {"class": self.classe, "method": self.method, "correct": self.correct,
                "total": self.total, "seed": self.seed}


@dataclass
class StudyReport:
    rows: list = field(default_factory=list)

    def contagem(self, classe: str, method: str, seed: Optional[int] = None) -> int:
        return sum(row.correct for row in self.rows
                   if row.classe == classe and row.method == method
                   and (seed is None or row.seed == seed))

    def to_dicts(self) -> list:
        return [row.to_dict() for row in self.rows]
