"""
Quadratura adaptativa de Simpson.

Os intervalos ativos são refinados em largura (todos os intervalos de um nível são
avaliados de uma vez com numpy), e a tolerância global max(abs_tol, rel_tol·|I|) é
distribuída proporcionalmente à largura de cada intervalo. Integrais em (a, ∞) são
levadas para (0, 1) com x = a + t/(1−t).
"""
import numpy as np

from src.models.dominio import QuadratureSpec
from src.utils.validators import DomainError, QuadratureError

INTERVALOS_INICIAIS = 64


def avaliar_vetorizado(f, x):
    """Avalia f em um array; funções escalares caem no laço elemento a elemento"""
    try:
        y = np.asarray(f(x))
    except (TypeError, ValueError):
        y = None

    if y is None or y.shape != x.shape:
        y = np.array([f(float(xi)) for xi in x])

    if not np.iscomplexobj(y):
        y = y.astype(float)

    return y


def integrate_interval(f, a: float, b: float, spec: QuadratureSpec = None):
    """
    Integra f em [a, b] finito. Aceita integrandos complexos.

    Levanta QuadratureError (com a estimativa parcial) se o número de subdivisões
    passar de spec.max_subdivisions ou se o integrando não for finito.
    """
    spec = spec or QuadratureSpec()

    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("Limites de integração devem ser finitos; use integrate_tail")

    if a == b:
        return 0.0

    if b < a:
        return -integrate_interval(f, b, a, spec)

    largura_total = float(b - a)
    bordas = np.linspace(a, b, INTERVALOS_INICIAIS + 1)
    lo, hi = bordas[:-1], bordas[1:]
    meio = 0.5 * (lo + hi)

    f_lo, f_meio, f_hi = avaliar_vetorizado(f, lo), avaliar_vetorizado(f, meio), avaliar_vetorizado(f, hi)
    simpson = (hi - lo) / 6.0 * (f_lo + 4.0 * f_meio + f_hi)

    aceito = 0.0
    subdivisoes = 0

    while lo.size:
        m_esq = 0.5 * (lo + meio)
        m_dir = 0.5 * (meio + hi)
        f_esq, f_dir = avaliar_vetorizado(f, m_esq), avaliar_vetorizado(f, m_dir)

        if not (np.all(np.isfinite(f_esq)) and np.all(np.isfinite(f_dir))
                and np.all(np.isfinite(simpson))):
            raise QuadratureError("Integrando não finito no domínio", aceito + np.sum(simpson))

        h = hi - lo
        s_esq = h / 12.0 * (f_lo + 4.0 * f_esq + f_meio)
        s_dir = h / 12.0 * (f_meio + 4.0 * f_dir + f_hi)
        refinado = s_esq + s_dir
        erro = np.abs(refinado - simpson) / 15.0

        estimativa = aceito + np.sum(refinado)
        tolerancia = max(spec.abs_tol, spec.rel_tol * abs(estimativa))
        ok = (erro <= tolerancia * h / largura_total) | (h <= 1e-15 * np.maximum(1.0, np.abs(lo)))

        # extrapolação de Richardson nos intervalos aceitos
        aceito = aceito + np.sum((refinado + (refinado - simpson) / 15.0)[ok])

        resto = ~ok
        subdivisoes += int(np.count_nonzero(resto))
        if subdivisoes > spec.max_subdivisions:
            raise QuadratureError(
                f"Quadratura não convergiu após {spec.max_subdivisions} subdivisões",
                aceito + np.sum(refinado[resto]),
            )

        lo, meio, hi = (
            np.concatenate([lo[resto], meio[resto]]),
            np.concatenate([m_esq[resto], m_dir[resto]]),
            np.concatenate([meio[resto], hi[resto]]),
        )
        f_lo, f_meio, f_hi = (
            np.concatenate([f_lo[resto], f_meio[resto]]),
            np.concatenate([f_esq[resto], f_dir[resto]]),
            np.concatenate([f_meio[resto], f_hi[resto]]),
        )
        simpson = np.concatenate([s_esq[resto], s_dir[resto]])

    if np.iscomplexobj(aceito):
        return complex(aceito)

    return float(aceito)


def integrate_tail(f, a: float, spec: QuadratureSpec = None):
    """Integra f em (a, ∞) com a troca x = a + t/(1−t)"""

    def transformada(t):
        t = np.asarray(t, dtype=float)
        interior = t < 1.0
        ti = t[interior]
        valores = avaliar_vetorizado(f, a + ti / (1.0 - ti)) / (1.0 - ti) ** 2
        saida = np.zeros(t.shape, dtype=valores.dtype)
        saida[interior] = valores
        return saida

    return integrate_interval(transformada, 0.0, 1.0, spec)


def integrate(f, spec: QuadratureSpec = None):
    """Integra f em (0, ∞)"""
    return integrate_tail(f, 0.0, spec)
