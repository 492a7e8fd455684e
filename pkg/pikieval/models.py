from sqlalchemy import (
    engine_from_config,
    Column,
    Table,
    MetaData,
    DateTime,
    Float,
    ForeignKey,
    Index,
    Integer,
    String,
)


def init_db(settings):
    engine = engine_from_config(settings)
    meta.create_all(engine)
    return engine


meta = MetaData()

experiment_table = Table(
    "experiment",
    meta,
    Column("id", Integer, primary_key=True),
    Column("name", String, nullable=False, index=True),
    Column("base_seed", Integer, nullable=False),
    Column("runs", Integer, nullable=False),
    Column("created_at", DateTime, index=True),
)

run_result_table = Table(
    "run_result",
    meta,
    Column("id", Integer, primary_key=True),
    Column("experiment_id", Integer, ForeignKey("experiment.id"), index=True),
    Column("run_index", Integer, nullable=False),
    Column("seed", Integer),
    Column("model", String, nullable=False),
    Column("stakeholder", String, nullable=False),
    Column("precision", Float),
    Column("recommended", Integer, nullable=False),
    Column("liked", Integer, nullable=False),
    Column("chosen_lambda", Float),
    Index("ix_run_result_model_stakeholder", "model", "stakeholder"),
)
