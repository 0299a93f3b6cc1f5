"""
Database Module
Run ledger: stores every recorded CLI run (command, parameters, results, outcome)
Uses SQLAlchemy with SQLite; records are detached from the session before return
"""

from sqlalchemy import create_engine, Column, String, DateTime, Integer, Boolean, JSON
from sqlalchemy.orm import declarative_base, sessionmaker, Session
from datetime import datetime
from typing import List, Optional, Dict, Any
from contextlib import contextmanager
from pathlib import Path
import logging

from config import config

logger = logging.getLogger(__name__)

# Create base class for models
Base = declarative_base()


# --- MODEL DEFINITIONS ---

class RunRecord(Base):
    """One CLI invocation and its outcome."""
    __tablename__ = 'runs'
    id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(50), nullable=False)
    parameters = Column(JSON)
    results = Column(JSON)
    passed = Column(Boolean, default=True)
    created_at = Column(DateTime, default=datetime.utcnow)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'command': self.command,
            'parameters': self.parameters,
            'results': self.results,
            'passed': self.passed,
            'created_at': self.created_at.isoformat() if self.created_at else None,
        }


# --- DATABASE HANDLER CLASS ---

class Database:
    """Run ledger handler."""

    def __init__(self, database_url: Optional[str] = None):
        self.database_url = database_url or config.DATABASE_URL
        logger.info(f"Initializing run ledger: {self.database_url}")
        if self.database_url.startswith('sqlite:///') and ':memory:' not in self.database_url:
            db_path = self.database_url.replace('sqlite:///', '')
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        self.engine = create_engine(
            self.database_url,
            connect_args={'check_same_thread': False} if 'sqlite' in self.database_url else {},
            echo=False
        )
        Base.metadata.create_all(self.engine)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine, expire_on_commit=False)

    @contextmanager
    def get_session(self) -> Session:
        session = self.SessionLocal()
        try:
            yield session
            session.commit()
        except Exception as e:
            session.rollback()
            logger.error(f"Database session error: {str(e)}")
            raise
        finally:
            session.close()

    # === Run Operations ===
    def record_run(self, command: str, parameters: Dict[str, Any], results: Dict[str, Any], passed: bool = True) -> int:
        with self.get_session() as session:
            record = RunRecord(command=command, parameters=parameters, results=results, passed=passed)
            session.add(record)
            session.flush()
            run_id = int(record.id)
        logger.info(f"Recorded {command} run with ID: {run_id}")
        return run_id

    def get_runs(self, command: Optional[str] = None, limit: Optional[int] = None) -> List[RunRecord]:
        with self.get_session() as session:
            query = session.query(RunRecord)
            if command:
                query = query.filter(RunRecord.command == command)
            query = query.order_by(RunRecord.id.desc())
            if limit:
                query = query.limit(limit)
            runs = query.all()
            for run in runs:
                session.expunge(run)
            return runs

    def get_run(self, run_id: int) -> Optional[RunRecord]:
        with self.get_session() as session:
            run = session.query(RunRecord).filter(RunRecord.id == run_id).first()
            if run:
                session.expunge(run)
            return run

    def clear_runs(self) -> int:
        with self.get_session() as session:
            deleted = session.query(RunRecord).delete()
        logger.info(f"Cleared {deleted} runs from the ledger")
        return deleted


_db: Optional[Database] = None


def get_database(database_url: Optional[str] = None) -> Database:
    """Shared ledger for the configured URL; a different URL gives a fresh handler."""
    global _db
    if database_url is not None:
        return Database(database_url)
    if _db is None:
        _db = Database()
    return _db
