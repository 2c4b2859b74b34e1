"""
Distribuições e amostradores compartilhados: inversa gaussiana (IG) e medida inclinada.

Convenção: IG(mean=μ, scale=λ) com densidade
    ν(x) = √(λ/(2πx³)) · exp(−λ(x−μ)²/(2μ²x)),  x > 0,
média μ e variância μ³/λ. "Fator de escala 1" significa λ = 1.
"""
import logging

import numpy as np

from src.models.dominio import InverseGaussianParams, QuadratureSpec
from src.utils.quadratura import integrate_interval
from src.utils.sementes import criar_gerador
from src.utils.validators import (
    DivergenceError,
    DomainError,
    FitError,
    ValidadorAmostras,
    ValidadorNumerico,
)

logger = logging.getLogger(__name__)


def ig_pdf(x, p: InverseGaussianParams):
    """
    Densidade IG. Escalares devem ser > 0; em arrays (nós de quadratura) o ponto
    x = 0 recebe o limite 0 da densidade.
    """
    if np.ndim(x) == 0:
        x = ValidadorNumerico.validar_real("x", x)
        if x <= 0:
            raise DomainError("A densidade IG só está definida para x > 0")
        return float(_densidade(np.array([x]), p.mean, p.scale)[0])

    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise DomainError("A densidade IG só está definida para x > 0")

    return _densidade(x, p.mean, p.scale)


def _densidade(x: np.ndarray, mean: float, scale: float) -> np.ndarray:
    saida = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    saida[pos] = np.sqrt(scale / (2.0 * np.pi * xp ** 3)) * np.exp(
        -scale * (xp - mean) ** 2 / (2.0 * mean ** 2 * xp)
    )
    return saida


def ig_cdf(x, p: InverseGaussianParams, spec: QuadratureSpec = None):
    """
    Função de distribuição acumulada por quadratura da densidade.

    Para arrays, integra entre pontos ordenados consecutivos e acumula.
    """
    escalar = np.ndim(x) == 0
    pontos = np.atleast_1d(np.asarray(x, dtype=float))

    if np.any(~np.isfinite(pontos)):
        raise DomainError("Pontos da CDF devem ser finitos")

    ordem = np.argsort(pontos, kind="stable")
    ordenados = np.maximum(pontos[ordem], 0.0)

    acumulado = 0.0
    anterior = 0.0
    valores = np.empty_like(ordenados)
    for k, ponto in enumerate(ordenados):
        if ponto > anterior:
            acumulado += integrate_interval(lambda t: ig_pdf(t, p), anterior, ponto, spec)
            anterior = ponto
        valores[k] = min(acumulado, 1.0)

    saida = np.empty_like(valores)
    saida[ordem] = valores
    return float(saida[0]) if escalar else saida


def amostrar_ig(rng: np.random.Generator, mean: float, scale: float, n: int) -> np.ndarray:
    """
    Transformação com rejeição (Michael, Schucany e Haas): raiz da transformação
    qui-quadrado seguida de aceitação uniforme entre as duas raízes.
    """
    y = rng.standard_normal(n) ** 2
    mu_y = mean * y
    x = mean + mean * mu_y / (2.0 * scale) - (mean / (2.0 * scale)) * np.sqrt(
        4.0 * mu_y * scale + mu_y ** 2
    )
    u = rng.random(n)
    # x pode virar 0 por cancelamento quando y é enorme; a outra raiz é então +inf
    x = np.maximum(x, np.finfo(float).tiny)
    return np.where(u <= mean / (mean + x), x, mean ** 2 / x)


def ig_sample(p: InverseGaussianParams, n: int, seed: int) -> np.ndarray:
    """n amostras i.i.d. de IG(p); determinístico dado a semente"""
    n = ValidadorNumerico.validar_inteiro_positivo("n", n)
    return amostrar_ig(criar_gerador(seed), p.mean, p.scale, n)


def ig_fit(samples) -> InverseGaussianParams:
    """
    Máxima verossimilhança (forma fechada):
    mean = média amostral; scale = n / Σ(1/xᵢ − 1/mean)
    """
    x = ValidadorAmostras.validar_positivas(samples, minimo=2)

    media = float(np.mean(x))
    soma = float(np.sum(1.0 / x - 1.0 / media))

    if not soma > 1e-12 * x.size / media:
        raise FitError("Amostras sem dispersão não têm estimador IG de máxima verossimilhança")

    return InverseGaussianParams(mean=media, scale=x.size / soma)


def ig_moments(p: InverseGaussianParams):
    """(m₁, m₂): primeiro e segundo momentos"""
    return p.mean, p.second_moment


def ig_mgf(c, p: InverseGaussianParams):
    """
    E[e^{cJ}] = exp((λ/μ)(1 − √(1 − 2μ²c/λ))), ramo principal para c complexo.
    Re(c) ≥ λ/(2μ²) diverge.
    """
    c_arr = np.asarray(c, dtype=complex)

    if np.any(c_arr.real >= p.mgf_bound):
        raise DivergenceError(
            f"Geradora de momentos IG diverge para Re(c) >= {p.mgf_bound:.6g}"
        )

    valor = np.exp((p.scale / p.mean) * (1.0 - np.sqrt(1.0 - 2.0 * p.mean ** 2 * c_arr / p.scale)))
    return complex(valor) if np.ndim(c) == 0 else valor


def amostrar_inclinada(rng: np.random.Generator, a: float, p: InverseGaussianParams, n: int) -> np.ndarray:
    """
    Amostras da medida normalizada (1 + a x)ν(dx)/(1 + a m₁).

    É a mistura de ν (peso 1/(1 + a m₁)) com a IG enviesada por tamanho
    x ν(dx)/m₁, cuja lei é a de X + (μ²/λ)Z² com X ~ ν e Z normal padrão.
    """
    base = amostrar_ig(rng, p.mean, p.scale, n)
    if a == 0 or n == 0:
        return base

    enviesada = rng.random(n) >= 1.0 / (1.0 + a * p.mean)
    qui = rng.standard_normal(n) ** 2
    return np.where(enviesada, base + (p.mean ** 2 / p.scale) * qui, base)


def sample_tilted(a: float, p: InverseGaussianParams, n: int, seed: int) -> np.ndarray:
    a = ValidadorNumerico.validar_nao_negativo("Inclinação a", a)
    n = ValidadorNumerico.validar_inteiro_positivo("n", n)
    return amostrar_inclinada(criar_gerador(seed), a, p, n)
