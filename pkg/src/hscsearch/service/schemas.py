"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

Algorithm = Literal["basic", "qhsc", "aqhsc", "ihsc", "oihsc"]


class QueryRequest(BaseModel):
    algo: Algorithm = "qhsc"
    mp: str = Field(..., description="meta-path such as A-M-A")
    k: int = Field(..., ge=0)
    q: Optional[str] = None
    w: Optional[float] = None
    parent_mp: Optional[str] = None

    @model_validator(mode="after")
    def one_probe(self) -> "QueryRequest":
        if (self.q is None) == (self.w is None):
            raise ValueError("give exactly one of q or w")
        return self


class CommunityOut(BaseModel):
    algorithm: str
    metapath: str
    k: int
    q: Optional[str] = None
    f: Optional[float] = None
    size: int
    vertices: list[str]
    empty_reason: Optional[str] = None


class QueryResponse(BaseModel):
    results: list[CommunityOut]

    @property
    def empty(self) -> bool:
        return all(r.size == 0 for r in self.results)


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str
    vertices: int
    edges: int
    vertex_types: list[str]
    indexes: dict[str, list[str]]


class MetaPathsResponse(BaseModel):
    metapaths: list[str]
    indexed: dict[str, list[str]]


class IndexStatsOut(BaseModel):
    metapath: str
    kind: str
    node_count: int
    stored_vertex_count: int
    serialized_bytes: int


class ErrorOut(BaseModel):
    detail: str
