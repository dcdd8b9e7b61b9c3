import httpx
import pytest
from fastapi.testclient import TestClient

from scorer_service import ServiceConfig, create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


class TestClientTransport(httpx.BaseTransport):
    """Sync httpx transport that dispatches into an in-process ASGI app,
    so the primary package's HTTP client can talk to the service without
    opening a socket."""

    def __init__(self, app):
        self._client = TestClient(app, raise_server_exceptions=False)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        response = self._client.request(
            request.method,
            str(request.url),
            content=request.read(),
            headers=dict(request.headers),
        )
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=response.content,
        )


@pytest.fixture()
def app_transport():
    def make(config: ServiceConfig = ServiceConfig(), **kwargs):
        return TestClientTransport(create_app(config, **kwargs))

    return make
