"""magrobin - Derived Constant Fixtures"""

from magrobin.fixtures.store import FIXTURE_VERSION, FixtureStore, build_fixtures

__all__ = ["FixtureStore", "build_fixtures", "FIXTURE_VERSION"]
