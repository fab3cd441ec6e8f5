# faircover/core/config.py
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()  # ensure .env is loaded no matter who imports settings


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="FAIRCOVER_", env_file=".env", extra="ignore")

    app_name: str = "Fair Cover Solver"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "INFO"

    # Brute-force oracles refuse anything larger than these caps
    oracle_vertex_cap: int = 16
    oracle_edge_cap: int = 20
    oracle_tm_edge_cap: int = 40

    # "dantzig-bland": largest reduced cost, Bland's rule on degenerate steps
    lp_pricing: Literal["dantzig-bland", "bland"] = "dantzig-bland"
    lp_dump_dir: Optional[str] = None

    # "decomposition": master LP over the coverage rows priced by minimum cuts; "simplex": the full LP
    cvc_relaxation: Literal["decomposition", "simplex"] = "decomposition"

    tm_branch_node_limit: Optional[int] = None


settings = Settings()
