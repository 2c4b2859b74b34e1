from .models import Base, Execucao, RegistroJanela, ResultadoEstudo

__all__ = ['Base', 'Execucao', 'RegistroJanela', 'ResultadoEstudo']
