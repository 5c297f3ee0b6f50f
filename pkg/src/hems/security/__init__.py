from .gateway import (
    GatewayConfig,
    SecurityGateway,
    ValidationVerdict,
    unwrap_privileged,
    wrap_privileged,
)
from .patterns import (
    CATEGORIES,
    InjectionPattern,
    PatternMatch,
    PatternRegistry,
    RiskLevel,
    load_patterns,
)
from .ratelimit import RateLimiter

__all__ = [
    "CATEGORIES",
    "GatewayConfig",
    "InjectionPattern",
    "PatternMatch",
    "PatternRegistry",
    "RateLimiter",
    "RiskLevel",
    "SecurityGateway",
    "ValidationVerdict",
    "load_patterns",
    "unwrap_privileged",
    "wrap_privileged",
]
