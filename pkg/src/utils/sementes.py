"""
Contrato de sementes.

Toda operação estocástica recebe uma semente (inteiro sem sinal de 64 bits) e deriva
dela geradores independentes via `SeedSequence`: o mesmo par (semente, chaves) produz
sempre o mesmo fluxo, e chaves diferentes produzem fluxos disjuntos. Isso permite
dividir simulações em lotes paralelos sem perder a reprodutibilidade.
"""
import numpy as np

from src.utils.validators import ValidationError

SEMENTE_MAXIMA = 2 ** 64 - 1


def validar_semente(semente) -> int:
    """Valida semente como inteiro em [0, 2^64)"""
    if semente is None:
        raise ValidationError("Semente é obrigatória")

    if isinstance(semente, bool) or not isinstance(semente, (int, np.integer)):
        raise ValidationError("Semente deve ser um inteiro")

    semente = int(semente)
    if not 0 <= semente <= SEMENTE_MAXIMA:
        raise ValidationError("Semente deve ser um inteiro sem sinal de 64 bits")

    return semente


def _sequencia(semente, chaves):
    chaves = tuple(int(c) for c in chaves)
    return np.random.SeedSequence(entropy=validar_semente(semente), spawn_key=chaves)


def criar_gerador(semente, *chaves) -> np.random.Generator:
    """Gerador PCG64 para o fluxo (semente, chaves...)"""
    return np.random.Generator(np.random.PCG64(_sequencia(semente, chaves)))


def derivar_semente(semente, *chaves) -> int:
    """Sub-semente de 64 bits para o fluxo (semente, chaves...)"""
    return int(_sequencia(semente, chaves).generate_state(1, dtype=np.uint64)[0])
