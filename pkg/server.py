from fastapi import FastAPI, HTTPException, Query
from pydantic import ValidationError
import argparse
from typing import Any, Dict, Optional

from app.core.carrier import CarrierParams
from app.core.errors import LabError
from app.experiments import EXPERIMENTS, create_experiment
from app.experiments.config import ExperimentConfig
from app.experiments.report import json_safe
from app.lab_config import SERVER_HOST, SERVER_PORT, get_logger

log = get_logger("server")

app = FastAPI(title="NLS Lab Server")


@app.get("/status")
def status():
    return {"status": "ok", "experiments": sorted(EXPERIMENTS)}


@app.get("/carrier")
def carrier(k0: float = Query(1.0), delta: Optional[float] = Query(None)):
    try:
        params = CarrierParams.from_k0(k0, delta)
    except LabError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return json_safe(params.as_dict())


# Runs in the threadpool; experiments are CPU-bound and block for their duration.
@app.post("/experiments/{name}")
def run_experiment(name: str, body: Optional[Dict[str, Any]] = None):
    if name not in EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"unknown experiment '{name}'")
    try:
        config = ExperimentConfig.model_validate({**(body or {}), "experiment": name})
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=e.errors(include_url=False, include_context=False))

    log.info(f"🧪 [Server] {name} (config {config.config_hash()[:12]})")
    try:
        report = create_experiment(config).run()
    except LabError as e:
        log.error(f"❌ [Server] {name} error: {e}")
        raise HTTPException(status_code=500, detail=str(e))
    return json_safe(report.to_dict())


if __name__ == "__main__":
    import uvicorn

    # --- ARGPARSE ---
    parser = argparse.ArgumentParser(description="NLS Lab Server")
    parser.add_argument("--host", type=str, default=SERVER_HOST)
    parser.add_argument("--port", type=int, default=SERVER_PORT)
    args, unknown = parser.parse_known_args()

    print(f"🌊 Serving NLS lab on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port)
