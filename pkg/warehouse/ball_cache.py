"""
Ball Cache
Stores enumerated group balls in a SQL database (sqlite by default) keyed by
group hash, radius and slack. A cached ball serves every smaller radius.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from sqlalchemy import create_engine, inspect, text

import config
from hyperbolic.ballenum import GroupBall, enumerate_ball
from hyperbolic.fuchsian import group_hash

logger = logging.getLogger(__name__)

RUNS_TABLE = "ball_runs"
ELEMENTS_TABLE = "ball_elements"


def get_engine(url=None):
    """SQLAlchemy engine for the cache URL; creates the sqlite directory if needed."""
    url = url or config.CACHE_URL
    if url.startswith("sqlite:///") and url != "sqlite:///:memory:":
        Path(url.removeprefix("sqlite:///")).parent.mkdir(parents=True, exist_ok=True)
    return create_engine(url)


class BallCache:
    def __init__(self, url=None, engine=None):
        self.engine = engine or get_engine(url)

    def _has_tables(self):
        tables = inspect(self.engine).get_table_names()
        return RUNS_TABLE in tables and ELEMENTS_TABLE in tables

    def store(self, group, ball):
        """Write one ball; replaces an earlier run with the same key."""
        key = group_hash(group)
        slack = round(float(ball.slack), 9)
        if self._has_tables():
            with self.engine.connect() as conn:
                for table in (RUNS_TABLE, ELEMENTS_TABLE):
                    conn.execute(
                        text(f"DELETE FROM {table} WHERE group_hash = :h AND R = :R AND slack = :s"),
                        {"h": key, "R": float(ball.R), "s": slack},
                    )
                conn.commit()

        runs = pd.DataFrame([{"group_hash": key, "R": float(ball.R), "slack": slack, "count": len(ball)}])
        elements = pd.DataFrame({
            "group_hash": key,
            "R": float(ball.R),
            "slack": slack,
            "idx": np.arange(len(ball)),
            "word": [" ".join(w) for w in ball.words],
            "a_re": ball.a.real,
            "a_im": ball.a.imag,
            "b_re": ball.b.real,
            "b_im": ball.b.imag,
            "displacement": ball.displacements,
        })
        runs.to_sql(RUNS_TABLE, self.engine, if_exists="append", index=False)
        elements.to_sql(ELEMENTS_TABLE, self.engine, if_exists="append", index=False)
        logger.info("cached ball R=%.4g (%d elements) for group %s", ball.R, len(ball), key[:12])

    def load(self, group, R, slack):
        """Smallest cached ball with radius >= R and the same slack, restricted to R; None if absent."""
        if not self._has_tables():
            return None
        key = group_hash(group)
        runs = pd.read_sql(
            text(f"SELECT R FROM {RUNS_TABLE} WHERE group_hash = :h AND slack = :s AND R >= :R ORDER BY R LIMIT 1"),
            self.engine,
            params={"h": key, "s": round(float(slack), 9), "R": float(R) - 1e-12},
        )
        if runs.empty:
            return None
        stored_R = float(runs["R"].iloc[0])
        rows = pd.read_sql(
            text(f"SELECT * FROM {ELEMENTS_TABLE} WHERE group_hash = :h AND R = :R AND slack = :s ORDER BY idx"),
            self.engine,
            params={"h": key, "R": stored_R, "s": round(float(slack), 9)},
        )
        ball = GroupBall(
            R=stored_R,
            slack=float(slack),
            words=tuple(tuple(w.split()) for w in rows["word"].fillna("")),
            a=(rows["a_re"] + 1j * rows["a_im"]).to_numpy(),
            b=(rows["b_re"] + 1j * rows["b_im"]).to_numpy(),
            displacements=rows["displacement"].to_numpy(),
        )
        return ball.restrict(R)


def cached_ball(cache, group, R, slack=None, budget=None):
    """Load from the cache or enumerate and store."""
    slack = group.polygon.circumradius if slack is None else slack
    if cache is not None:
        ball = cache.load(group, R, slack)
        if ball is not None:
            logger.info("ball R=%.4g served from cache", R)
            return ball
    ball = enumerate_ball(group, R, slack, budget)
    if cache is not None:
        cache.store(group, ball)
    return ball
