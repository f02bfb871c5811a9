"""
cifsim – SQLAlchemy ORM models package.

Imports all model classes so the app can discover them through a single
``from app.models import *`` import.
"""

from app.models.run import RunRecord  # noqa: F401
