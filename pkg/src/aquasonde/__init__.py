"""aquasonde: desk-scale river water-quality survey system.

Sensor-node wire protocol, pH electrode calibration, geotagged dwell
capture, a durable HTTP ingestion service, a deterministic device
simulator, and per-location survey reporting.
"""

from .calibration import (
    BufferPoint,
    PhCalibration,
    electrode_mv_from_adc,
    ideal_calibration,
    load_calibration,
    ph_from_mv,
    save_calibration,
    temp_c_from_adc,
    two_point_calibrate,
)
from .samples import (
    Classification,
    QualityAssessment,
    Reading,
    Station,
    StationSummary,
    assess_ph,
    assess_temperature,
    dedup_key,
    dwell_capture,
    readings_from_csv,
    readings_to_csv,
    summarize_station,
)
from .scenario import ScenarioScript, ScenarioStation, bundled_scenario_path, load_scenario
from .service import IngestService, open_service
from .simulator import inject_fault, simulate
from .store import ReadingStore
from .wire import (
    FrameError,
    FrameErrorKind,
    SensorFrame,
    StreamDecoder,
    decode_frame,
    decode_stream,
    encode_frame,
    seq_gap,
)

__version__ = "0.1.0"

__all__ = [
    "BufferPoint",
    "Classification",
    "FrameError",
    "FrameErrorKind",
    "IngestService",
    "PhCalibration",
    "QualityAssessment",
    "Reading",
    "ReadingStore",
    "ScenarioScript",
    "ScenarioStation",
    "SensorFrame",
    "Station",
    "StationSummary",
    "StreamDecoder",
    "assess_ph",
    "assess_temperature",
    "bundled_scenario_path",
    "decode_frame",
    "decode_stream",
    "dedup_key",
    "dwell_capture",
    "electrode_mv_from_adc",
    "encode_frame",
    "ideal_calibration",
    "inject_fault",
    "load_calibration",
    "load_scenario",
    "open_service",
    "ph_from_mv",
    "readings_from_csv",
    "readings_to_csv",
    "save_calibration",
    "seq_gap",
    "simulate",
    "summarize_station",
    "temp_c_from_adc",
    "two_point_calibrate",
]
