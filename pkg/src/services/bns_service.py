"""
Modelo BN-S refinado.

    dX_t  = (μ + βσ_t²)dt + σ_t dW_t + ρ((1−θ)dZ_{λt} + θ dZ^(b)_{λt})
    dσ_t² = −λσ_t² dt + (1−θ)dZ_{λt} + θ dZ^(b)_{λt}

Z e Z^(b) são Poisson compostos com marcas IG. Como rodam no relógio λt, a taxa
de saltos em tempo real é λ·rate. O processo efetivo Z^(e) = (1−θ)Z + θZ^(b)
concentra toda a dependência em θ.
"""
import logging
import math

import numpy as np
from scipy import optimize

from src.models.dominio import (
    BnsParams,
    BnsPaths,
    JumpStream,
    PathGrid,
    QuadratureSpec,
    SubordinatorSpec,
)
from src.services.levy_service import amostrar_ig, ig_mgf
from src.utils.paralelo import mapear
from src.utils.quadratura import integrate_interval
from src.utils.sementes import criar_gerador
from src.utils.validators import DivergenceError, DomainError, ValidadorNumerico, ValidationError

logger = logging.getLogger(__name__)

ESQUEMAS = ("euler", "exact")
PONTOS_GRADE = 1024
TAMANHO_BLOCO = 256


def epsilon(s, T: float, lam: float):
    """ε(s, T) = (1 − e^{−λ(T−s)})/λ"""
    lam = ValidadorNumerico.validar_positivo("lambda", lam)
    s_arr = np.asarray(s, dtype=float)

    if np.any(s_arr > T):
        raise DomainError("epsilon exige s <= T")

    valor = -np.expm1(-lam * (T - s_arr)) / lam
    return float(valor) if np.ndim(s) == 0 else valor


def validar_subordinadores(z: SubordinatorSpec, zb: SubordinatorSpec):
    if not zb.intensity > z.intensity:
        raise ValidationError(
            f"Z^(b) deve ter intensidade maior que Z ({zb.intensity:.6g} <= {z.intensity:.6g})"
        )


# ---------------------------------------------------------------------------------
# Fluxos de saltos
# ---------------------------------------------------------------------------------

def _saltos(rng, spec: SubordinatorSpec, lam: float, t0: float, t1: float):
    n = rng.poisson(lam * spec.rate * (t1 - t0))
    tempos = np.sort(rng.uniform(t0, t1, n))
    tamanhos = amostrar_ig(rng, spec.params.mean, spec.params.scale, n)
    return tempos, tamanhos


def simulate_jump_stream(z: SubordinatorSpec, zb: SubordinatorSpec, t0: float, t1: float,
                         lam: float, seed: int, *chaves) -> JumpStream:
    """Saltos de Z_{λt} e Z^(b)_{λt} em (t0, t1], cada um com seu próprio fluxo"""
    tz, jz = _saltos(criar_gerador(seed, *chaves, 0), z, lam, t0, t1)
    tzb, jzb = _saltos(criar_gerador(seed, *chaves, 1), zb, lam, t0, t1)
    return JumpStream(times_z=tz, sizes_z=jz, times_zb=tzb, sizes_zb=jzb)


def _por_passo(tempos, pesos, grid: PathGrid) -> np.ndarray:
    """Soma dos pesos dos saltos dentro de cada passo (t_k, t_{k+1}]"""
    passo = np.ceil((tempos - grid.t0) / grid.dt).astype(int) - 1
    passo = np.clip(passo, 0, grid.steps - 1)
    return np.bincount(passo, weights=pesos, minlength=grid.steps)


# ---------------------------------------------------------------------------------
# Trajetórias
# ---------------------------------------------------------------------------------

def _simular_bloco(tarefa):
    p, z, zb, grid, indices, seed, esquema, guardar = tarefa
    n, passos, dt = len(indices), grid.steps, grid.dt
    tempos_grade = grid.times()

    dz = np.zeros((n, passos))
    dzb = np.zeros((n, passos))
    dz2 = np.zeros((n, passos))
    dzb2 = np.zeros((n, passos))
    decaido = np.zeros((n, passos))
    integrado = np.zeros((n, passos))
    normais = np.empty((n, passos))
    fluxos = []

    for linha, i in enumerate(indices):
        fluxo = simulate_jump_stream(z, zb, grid.t0, grid.t1, p.lam, seed, i)
        normais[linha] = criar_gerador(seed, i, 2).standard_normal(passos)

        dz[linha] = _por_passo(fluxo.times_z, fluxo.sizes_z, grid)
        dzb[linha] = _por_passo(fluxo.times_zb, fluxo.sizes_zb, grid)
        dz2[linha] = _por_passo(fluxo.times_z, fluxo.sizes_z ** 2, grid)
        dzb2[linha] = _por_passo(fluxo.times_zb, fluxo.sizes_zb ** 2, grid)

        if esquema == "exact":
            tempos, tamanhos = fluxo.efetivos(p.theta)
            passo = np.clip(np.ceil((tempos - grid.t0) / dt).astype(int) - 1, 0, passos - 1)
            restante = tempos_grade[passo + 1] - tempos
            decaido[linha] = np.bincount(passo, weights=np.exp(-p.lam * restante) * tamanhos,
                                         minlength=passos)
            integrado[linha] = np.bincount(passo, weights=-np.expm1(-p.lam * restante) / p.lam * tamanhos,
                                           minlength=passos)
        if guardar:
            fluxos.append(fluxo)

    x = np.zeros((n, passos + 1))
    s2 = np.zeros((n, passos + 1))
    s2[:, 0] = p.sigma0_sq
    dze = (1.0 - p.theta) * dz + p.theta * dzb
    fator = math.exp(-p.lam * dt)
    eps_passo = -math.expm1(-p.lam * dt) / p.lam

    for k in range(passos):
        if esquema == "euler":
            x[:, k + 1] = (x[:, k] + (p.mu + p.beta * s2[:, k]) * dt
                           + np.sqrt(s2[:, k] * dt) * normais[:, k] + p.rho * dze[:, k])
            s2[:, k + 1] = s2[:, k] * fator + dze[:, k]
        else:
            variancia = eps_passo * s2[:, k] + integrado[:, k]
            x[:, k + 1] = (x[:, k] + p.mu * dt + p.beta * variancia
                           + np.sqrt(variancia) * normais[:, k] + p.rho * dze[:, k])
            s2[:, k + 1] = s2[:, k] * fator + decaido[:, k]

    zeros = np.zeros((n, 1))
    jz = np.hstack([zeros, np.cumsum(dz2, axis=1)])
    jzb = np.hstack([zeros, np.cumsum(dzb2, axis=1)])
    return x, s2, jz, jzb, fluxos


def simulate_paths(p: BnsParams, z: SubordinatorSpec, zb: SubordinatorSpec, grid: PathGrid,
                   n_paths: int, seed: int, scheme: str = "euler", workers: int = 1,
                   keep_streams: bool = False) -> BnsPaths:
    """
    Trajetórias de (X_t, σ_t²) no grid, X_{t0} = 0.

    "euler": decaimento multiplicativo e incremento do subordinador somado no fim do passo.
    "exact": decaimento exato entre saltos, variância integrada exata por passo e
    incremento de X condicionalmente gaussiano.

    A trajetória i usa os fluxos (seed, i, ·), então não depende de n_paths nem de workers.
    """
    validar_subordinadores(z, zb)
    n_paths = ValidadorNumerico.validar_inteiro_positivo("n_paths", n_paths)

    if scheme not in ESQUEMAS:
        raise ValidationError(f"Esquema deve ser um de {ESQUEMAS}")

    tarefas = [(p, z, zb, grid, list(range(inicio, min(inicio + TAMANHO_BLOCO, n_paths))),
                seed, scheme, keep_streams)
               for inicio in range(0, n_paths, TAMANHO_BLOCO)]
    blocos = mapear(_simular_bloco, tarefas, workers)

    return BnsPaths(
        times=grid.times(),
        x=np.vstack([b[0] for b in blocos]),
        sigma_sq=np.vstack([b[1] for b in blocos]),
        jumps_sq_z=np.vstack([b[2] for b in blocos]),
        jumps_sq_zb=np.vstack([b[3] for b in blocos]),
        streams=[f for b in blocos for f in b[4]] if keep_streams else None,
    )


def sigma_sq_closed_form(stream: JumpStream, p: BnsParams, t: float, t0: float = 0.0) -> float:
    """σ_t² = e^{−λ(t−t0)}σ₀² + Σ_{τ≤t} e^{−λ(t−τ)}((1−θ)J + θJ^(b))"""
    if t < t0:
        raise DomainError("t deve ser maior ou igual a t0")

    tempos, tamanhos = stream.efetivos(p.theta)
    dentro = (tempos > t0) & (tempos <= t)
    saltos = np.sum(np.exp(-p.lam * (t - tempos[dentro])) * tamanhos[dentro])
    return float(math.exp(-p.lam * (t - t0)) * p.sigma0_sq + saltos)


def evolve_sigma_sq_euler(stream: JumpStream, p: BnsParams, grid: PathGrid) -> np.ndarray:
    """σ² pelo esquema de Euler sobre um fluxo de saltos dado"""
    tempos, tamanhos = stream.efetivos(p.theta)
    dentro = (tempos > grid.t0) & (tempos <= grid.t1)
    incrementos = _por_passo(tempos[dentro], tamanhos[dentro], grid)
    fator = math.exp(-p.lam * grid.dt)

    s2 = np.empty(grid.steps + 1)
    s2[0] = p.sigma0_sq
    for k in range(grid.steps):
        s2[k + 1] = s2[k] * fator + incrementos[k]
    return s2


def integrated_variance(sigma_t_sq: float, stream: JumpStream, p: BnsParams, t: float, T: float) -> float:
    """σ_I² = ε(t,T)σ_t² + Σ_{t<τ≤T} ε(τ,T)((1−θ)J + θJ^(b))"""
    if T < t:
        raise DomainError("integrated_variance exige t <= T")
    if T == t:
        return 0.0

    tempos, tamanhos = stream.efetivos(p.theta)
    dentro = (tempos > t) & (tempos <= T)
    saltos = np.sum(epsilon(tempos[dentro], T, p.lam) * tamanhos[dentro])
    return float(epsilon(t, T, p.lam) * sigma_t_sq + saltos)


# ---------------------------------------------------------------------------------
# Correlação
# ---------------------------------------------------------------------------------

def correlation(p: BnsParams, z: SubordinatorSpec, zb: SubordinatorSpec, s: float, t: float,
                iv_s: float, iv_t: float, jumps_sq_s: float = 0.0, jumps_sq_b_s: float = 0.0) -> float:
    """
    Corr(X_t, X_s) = (∫₀^s σ² + ρ²(1−θ)²J(s) + ρ²θ²J^(b)(s)) / √(α(t)α(s)),
    α(v) = ∫₀^v σ² + vρ²λ((1−θ)²Var(Z₁) + θ²Var(Z^(b)₁)).

    J(s) é a soma realizada dos quadrados dos saltos até s. O valor não é
    truncado a [−1, 1].
    """
    if not 0 < s < t:
        raise DomainError("correlation exige 0 < s < t")

    rho2, theta = p.rho ** 2, p.theta
    variancia_saltos = rho2 * p.lam * ((1 - theta) ** 2 * z.variance_unit + theta ** 2 * zb.variance_unit)

    alpha_s = iv_s + s * variancia_saltos
    alpha_t = iv_t + t * variancia_saltos
    numerador = iv_s + rho2 * (1 - theta) ** 2 * jumps_sq_s + rho2 * theta ** 2 * jumps_sq_b_s

    return float(numerador / math.sqrt(alpha_t * alpha_s))


def _integral_ate(tempos, valores, limite):
    """∫ trapezoidal de valores até `limite` (interpolado linearmente)"""
    acumulado = np.concatenate([[0.0], np.cumsum(0.5 * (valores[1:] + valores[:-1]) * np.diff(tempos))])
    return float(np.interp(limite, tempos, acumulado))


def correlation_from_paths(p: BnsParams, z: SubordinatorSpec, zb: SubordinatorSpec, paths: BnsPaths,
                           s: float, t: float, caminho: int = 0) -> float:
    """Fórmula da correlação avaliada na realização `caminho`"""
    tempos = paths.times
    if not tempos[0] <= s < t <= tempos[-1]:
        raise DomainError("s e t devem estar dentro do grid")

    indice_s = int(np.searchsorted(tempos, s, side="right")) - 1
    return correlation(
        p, z, zb, s, t,
        iv_s=_integral_ate(tempos, paths.sigma_sq[caminho], s),
        iv_t=_integral_ate(tempos, paths.sigma_sq[caminho], t),
        jumps_sq_s=float(paths.jumps_sq_z[caminho, indice_s]),
        jumps_sq_b_s=float(paths.jumps_sq_zb[caminho, indice_s]),
    )


def correlation_monte_carlo(paths: BnsPaths, s: float, t: float) -> float:
    """Correlação amostral entre X_s e X_t (pontos do grid mais próximos)"""
    indice_s = int(np.argmin(np.abs(paths.times - s)))
    indice_t = int(np.argmin(np.abs(paths.times - t)))
    return float(np.corrcoef(paths.x[:, indice_s], paths.x[:, indice_t])[0, 1])


# ---------------------------------------------------------------------------------
# Cumulante e transformada de Laplace
# ---------------------------------------------------------------------------------

def theta_hat(z: SubordinatorSpec, zb: SubordinatorSpec, theta: float) -> float:
    """θ̂^(e) = sup{c : κ^(e)(c) < ∞} = min sobre componentes com peso > 0 de limite/peso"""
    limites = [spec.params.mgf_bound / peso
               for spec, peso in ((z, 1.0 - theta), (zb, theta)) if peso > 0]
    return float(min(limites))


def cumulant_effective(c, z: SubordinatorSpec, zb: SubordinatorSpec, theta: float):
    """κ^(e)(c) = κ_Z((1−θ)c) + κ_{Z^(b)}(θc),  κ(c) = rate·(E[e^{cJ}] − 1)"""
    ValidadorNumerico.validar_intervalo("theta", theta, 0.0, 1.0)
    c_arr = np.asarray(c, dtype=complex)
    limite = theta_hat(z, zb, theta)

    if np.any(c_arr.real >= limite):
        raise DivergenceError(f"Cumulante efetivo diverge para Re(c) >= {limite:.6g}")

    valor = np.zeros(c_arr.shape, dtype=complex)
    for spec, peso in ((z, 1.0 - theta), (zb, theta)):
        if peso > 0:
            valor = valor + spec.rate * (ig_mgf(peso * c_arr, spec.params) - 1.0)

    return complex(valor) if np.ndim(c) == 0 else valor


def _raizes_faixa(eps, p: BnsParams, limite: float):
    """Raízes (negativa, positiva) de (ε/2)z² + (βε + ρ)z − θ̂ = 0, na forma estável"""
    b = p.beta * eps + p.rho
    raiz_delta = np.sqrt(b ** 2 + 2.0 * eps * limite)
    q = -0.5 * (b + np.where(b >= 0, raiz_delta, -raiz_delta))
    z1 = q / (0.5 * eps)
    z2 = -limite / q
    return np.minimum(z1, z2), np.maximum(z1, z2)


def strip_bounds(p: BnsParams, t: float, T: float, theta_hat: float):
    """
    (θ₋, θ₊): θ₋ = sup_s raiz negativa, θ₊ = inf_s raiz positiva, com s em [t, T).
    Grade densa mais refinamento limitado em torno do melhor ponto.
    """
    if t >= T:
        raise DomainError("strip_bounds exige t < T")
    limite = ValidadorNumerico.validar_positivo("theta_hat", theta_hat)

    def raizes(s):
        return _raizes_faixa(epsilon(s, T, p.lam), p, limite)

    grade = np.concatenate([np.linspace(t, T, PONTOS_GRADE + 1)[:-1], [T - 1e-9 * (T - t)]])
    negativas, positivas = raizes(grade)

    def refinar(valores, sinal, indice_raiz):
        k = int(np.argmax(sinal * valores))
        esquerda, direita = grade[max(k - 1, 0)], grade[min(k + 1, grade.size - 1)]
        melhor = sinal * valores[k]
        if direita > esquerda:
            res = optimize.minimize_scalar(lambda s: -sinal * raizes(s)[indice_raiz],
                                           bounds=(esquerda, direita), method="bounded",
                                           options={"xatol": 1e-12 * max(1.0, abs(T))})
            melhor = max(melhor, -res.fun)
        return sinal * melhor

    theta_menos = refinar(negativas, 1.0, 0)
    theta_mais = refinar(positivas, -1.0, 1)

    if not theta_menos < 0 < theta_mais:
        raise DomainError(f"Faixa inválida: ({theta_menos}, {theta_mais})")

    return float(theta_menos), float(theta_mais)


def laplace_transform(zc, p: BnsParams, z: SubordinatorSpec, zb: SubordinatorSpec, t: float, T: float,
                      x_t: float, sigma_t_sq: float, quad: QuadratureSpec = None) -> complex:
    """
    φ(z) = exp(z(X_t + μ(T−t)) + ½(z² + 2βz)ε(t,T)σ_t² + λ∫_t^T G(s,z)ds),
    G(s,z) = κ^(e)(ρz + ½(z² + 2βz)ε(s,T)).
    """
    if t > T:
        raise DomainError("laplace_transform exige t <= T")

    zc = complex(zc)
    quadratico = 0.5 * (zc ** 2 + 2.0 * p.beta * zc)

    def argumento(s):
        return p.rho * zc + quadratico * epsilon(s, T, p.lam)

    # sonda a faixa antes da quadratura
    cumulant_effective(argumento(np.linspace(t, T, PONTOS_GRADE + 1)), z, zb, p.theta)

    integral = 0.0
    if T > t:
        integral = integrate_interval(lambda s: cumulant_effective(argumento(s), z, zb, p.theta),
                                      t, T, quad)

    expoente = (zc * (x_t + p.mu * (T - t)) + quadratico * epsilon(t, T, p.lam) * sigma_t_sq
                + p.lam * integral)
    return complex(np.exp(expoente))


def laplace_monte_carlo(zc: float, p: BnsParams, z: SubordinatorSpec, zb: SubordinatorSpec, t: float,
                        T: float, x_t: float, sigma_t_sq: float, n_paths: int, seed: int,
                        steps: int = 50, workers: int = 1):
    """(média, erro padrão) de e^{zX_T} dado (X_t, σ_t²), pelo esquema exato"""
    caminhos = simulate_paths(p.com(sigma0_sq=sigma_t_sq), z, zb, PathGrid(t, T, steps), n_paths, seed,
                              scheme="exact", workers=workers)
    valores = np.exp(zc * (x_t + caminhos.x[:, -1]))
    return float(valores.mean()), float(valores.std(ddof=1) / math.sqrt(n_paths))
