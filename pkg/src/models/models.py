from sqlalchemy import Column, Integer, String, DateTime, Float, ForeignKey, Text
from sqlalchemy.orm import declarative_base, relationship
from datetime import datetime

Base = declarative_base()


class Execucao(Base):
    __tablename__ = 'execucoes'

    id = Column(Integer, primary_key=True, autoincrement=True)
    comando = Column(String(50), nullable=False)
    semente = Column(String(20), nullable=False)  # uint64 não cabe em INTEGER do SQLite
    config_json = Column(Text, nullable=False)
    data_execucao = Column(DateTime, default=datetime.now)

    # Relacionamentos
    registros = relationship("RegistroJanela", back_populates="execucao", cascade="all, delete-orphan")
    resultados = relationship("ResultadoEstudo", back_populates="execucao", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<Execucao(comando='{self.comando}', semente={self.semente})>"


class RegistroJanela(Base):
    __tablename__ = 'registros_janela'

    id = Column(Integer, primary_key=True, autoincrement=True)
    execucao_id = Column(Integer, ForeignKey('execucoes.id'), nullable=False)
    period_start_index = Column(Integer, nullable=False)
    a_hat = Column(Float, nullable=False)
    sigma = Column(Float, nullable=False)
    beta = Column(Float, nullable=True)
    gamma = Column(Float, nullable=True)
    C = Column(Float, nullable=True)
    M = Column(Float, nullable=True)
    B = Column(Float, nullable=True)
    r_f = Column(Float, nullable=True)
    r_g = Column(Float, nullable=True)
    r = Column(Float, nullable=True)
    right_exits = Column(Integer, nullable=False)
    left_exits = Column(Integer, nullable=False)
    no_exits = Column(Integer, nullable=False)
    label = Column(Integer, nullable=False)

    execucao = relationship("Execucao", back_populates="registros")

    def __repr__(self):
        return f"<RegistroJanela(inicio={self.period_start_index}, label={self.label})>"


class ResultadoEstudo(Base):
    __tablename__ = 'resultados_estudo'

    id = Column(Integer, primary_key=True, autoincrement=True)
    execucao_id = Column(Integer, ForeignKey('execucoes.id'), nullable=False)
    classe = Column(String(30), nullable=False)
    metodo = Column(String(30), nullable=False)
    corretos = Column(Integer, nullable=False)
    total = Column(Integer, nullable=False)
    semente = Column(String(20), nullable=False)

    execucao = relationship("Execucao", back_populates="resultados")

    def __repr__(self):
        return f"<ResultadoEstudo(classe='{self.classe}', metodo='{self.metodo}', corretos={self.corretos}/{self.total})>"
