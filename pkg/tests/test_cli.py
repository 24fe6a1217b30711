"""CLI against a live service: flows, json-mode byte fidelity, exit codes."""

import json

import httpx
import pytest
from click.testing import CliRunner

from carbonledger import MarketService, ServiceConfig
from carbonledger.cli import main
from helpers import start_http_server, stop_http_server


@pytest.fixture(scope="module")
def live(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("cli-deploy")
    config = ServiceConfig(
        data_dir=str(data_dir / "data"),
        platform_profile="solana",
        block_interval_s=0.02,
        issuer_name="CLI Registry Org",
    )
    service = MarketService(config)
    service.start()
    server, thread, url = start_http_server(service)
    issuer_cred = service.engine.registry.accounts[service.issuer_id].credential
    yield service, url, issuer_cred, data_dir
    stop_http_server(server, thread)
    service.stop()


def run_cli(url, credential, *args, output="json"):
    runner = CliRunner()
    argv = ["--url", url, "--credential", credential, "--output", output, *args]
    return runner.invoke(main, argv)


def test_init_writes_config(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "init", "--data-dir", str(tmp_path / "deploy"), "--profile", "stellar",
        "--royalty-bps", "250",
    ])
    assert result.exit_code == 0, result.output
    config = json.loads((tmp_path / "deploy" / "config.json").read_text())
    assert config["platform_profile"] == "stellar"
    assert config["royalty_bps"] == 250


def test_init_rejects_unknown_profile(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["init", "--data-dir", str(tmp_path), "--profile", "bogus"])
    assert result.exit_code != 0


def test_full_market_flow(live, tmp_path):
    service, url, issuer_cred, _ = live

    registered = run_cli(url, issuer_cred, "account", "register",
                         "--name", "CLI Trading Desk", "--contact", "cli@example")
    assert registered.exit_code == 0, registered.output
    trader = json.loads(registered.stdout_bytes)
    assert trader["role"] == "Trader"

    deposited = run_cli(url, issuer_cred, "deposit",
                        "--account", trader["account_id"], "--amount", "10000000000")
    assert deposited.exit_code == 0
    assert json.loads(deposited.stdout_bytes)["balance"] == 10_000_000_000

    cert_file = tmp_path / "cert.pdf"
    cert_file.write_bytes(b"%PDF-1.4 demo certificate body")
    uploaded = run_cli(url, issuer_cred, "cert", "upload", str(cert_file))
    assert uploaded.exit_code == 0
    digest = json.loads(uploaded.stdout_bytes)["digest"]

    minted = run_cli(url, issuer_cred, "mint", "--cert", digest, "--name", "CLI Lot",
                     "--symbol", "CLI", "--price", "100000000")
    assert minted.exit_code == 0
    token = json.loads(minted.stdout_bytes)
    assert token["token_id"] == 1

    shown = run_cli(url, issuer_cred, "listings", "--tier", "primary")
    listing_rows = json.loads(shown.stdout_bytes)
    assert [l["listing_id"] for l in listing_rows] == [token["listing_id"]]

    bought = run_cli(url, trader["credential"], "buy", "--listing", str(token["listing_id"]))
    assert bought.exit_code == 0
    receipt = json.loads(bought.stdout_bytes)
    assert receipt["royalty"] == 0

    relisted = run_cli(url, trader["credential"], "sell",
                       "--token", str(token["token_id"]), "--price", "120000000")
    assert relisted.exit_code == 0
    assert json.loads(relisted.stdout_bytes)["tier"] == "Secondary"

    cancelled = run_cli(url, trader["credential"], "cancel",
                        "--listing", str(json.loads(relisted.stdout_bytes)["listing_id"]))
    assert cancelled.exit_code == 0

    provenance = run_cli(url, issuer_cred, "provenance", "--token", str(token["token_id"]))
    assert provenance.exit_code == 0
    assert len(json.loads(provenance.stdout_bytes)["entries"]) == 2

    verify = run_cli(url, issuer_cred, "chain", "verify")
    assert verify.exit_code == 0
    assert json.loads(verify.stdout_bytes)["ok"] is True


def test_stats_json_matches_api_bytes(live):
    _, url, issuer_cred, _ = live
    result = run_cli(url, issuer_cred, "stats")
    api_body = httpx.get(url + "/analytics").content
    assert result.stdout_bytes.rstrip(b"\n") == api_body


def test_chain_export_matches_block_log(live):
    service, url, issuer_cred, data_dir = live
    result = run_cli(url, issuer_cred, "chain", "export")
    exported = result.stdout_bytes
    on_disk = (data_dir / "data" / "blocks.log").read_bytes()
    assert exported == on_disk


def test_service_error_exits_nonzero_with_body(live):
    _, url, issuer_cred, _ = live
    result = run_cli(url, issuer_cred, "buy", "--listing", "99999")
    assert result.exit_code == 1
    assert json.loads(result.stdout_bytes)["code"] == "UnknownListing"
    human = run_cli(url, issuer_cred, "buy", "--listing", "99999", output="human")
    assert human.exit_code == 1


def test_unreachable_service_exit_code(tmp_path):
    result = run_cli("http://127.0.0.1:1", "x", "stats")
    assert result.exit_code == 2


def test_demo_seed_builds_canonical_fixture(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("seed-deploy")
    config = ServiceConfig(
        data_dir=str(data_dir / "data"), platform_profile="solana", block_interval_s=0.02,
    )
    service = MarketService(config)
    service.start()
    server, thread, url = start_http_server(service)
    try:
        issuer_cred = service.engine.registry.accounts[service.issuer_id].credential
        result = run_cli(url, issuer_cred, "demo", "seed")
        assert result.exit_code == 0, result.output
        summary = json.loads(result.stdout_bytes)
        assert len(summary["traders"]) == 3
        assert len(summary["certificates"]) == 3
        assert summary["duplicate_rejected"] is True

        analytics = httpx.get(url + "/analytics").json()
        assert analytics["total_minted"] == 3
        assert analytics["total_certificates_uploaded"] == 3
        assert analytics["duplicate_attempts"] == 1
        assert analytics["open_primary"] == 0
        assert analytics["open_secondary"] == 1
        # volume: primaries at 100M, 200M, 300M plus one resale at 150M
        assert analytics["total_trade_volume"] == 750_000_000
        secondary = httpx.get(url + "/listings", params={"tier": "secondary"}).json()
        assert [l["listing_id"] for l in secondary] == [summary["open_secondary_listing"]]
    finally:
        stop_http_server(server, thread)
        service.stop()
