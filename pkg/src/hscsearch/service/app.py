"""HTTP front end over a :class:`~hscsearch.workspace.Workspace`.

The graph and any index files are loaded once, before the app is created.
Handlers are plain functions so FastAPI runs them in its thread pool; the
workspace serialises on-demand index builds behind its own lock.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..index.ihsc import IndexError_
from ..index.serialize import index_stats
from ..metapath import all_metapaths
from ..workspace import QueryError, Workspace
from .schemas import (
    CommunityOut,
    ErrorOut,
    HealthResponse,
    IndexStatsOut,
    MetaPathsResponse,
    QueryRequest,
    QueryResponse,
)


def create_app(ws: Workspace) -> FastAPI:
    app = FastAPI(title="hscsearch", version=__version__)
    app.state.ws = ws

    @app.exception_handler(QueryError)
    def _bad_query(request: Request, exc: QueryError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(IndexError_)
    def _bad_index(request: Request, exc: IndexError_):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        g = ws.graph
        return HealthResponse(
            version=__version__,
            vertices=g.n,
            edges=g.edge_count,
            vertex_types=[t.name for t in g.schema.vertex_types],
            indexes={kind: idx.metapaths for kind, idx in ws.indexes.items()},
        )

    @app.get("/metapaths", response_model=MetaPathsResponse)
    def metapaths(max_len: int = 5) -> MetaPathsResponse:
        if max_len < 3:
            raise HTTPException(status_code=400, detail="max_len must be at least 3")
        return MetaPathsResponse(
            metapaths=[str(p) for p in all_metapaths(ws.graph.schema, max_len)],
            indexed={kind: idx.metapaths for kind, idx in ws.indexes.items()},
        )

    @app.post("/query", response_model=QueryResponse, responses={400: {"model": ErrorOut}})
    def query(req: QueryRequest) -> QueryResponse:
        found = ws.query(req.algo, req.mp, req.k, q=req.q, w=req.w, parent_mp=req.parent_mp)
        return QueryResponse(results=[CommunityOut(**r.to_dict(ws.graph)) for r in found])

    @app.get("/index/stats", response_model=list[IndexStatsOut])
    def stats(kind: str | None = None) -> list[IndexStatsOut]:
        out = []
        for name, idx in ws.indexes.items():
            if kind is None or kind.upper() == name:
                out.extend(IndexStatsOut(**s.to_dict()) for s in index_stats(idx))
        return out

    return app
