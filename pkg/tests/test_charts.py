import numpy as np
import pandas as pd

from utils.charts import alignment_figure, curvature_figure, loss_figure, spectrum_figure, telemetry_frame
from utils.runner import make_run_config, records_frame, run


def frame_for(optimizer, **overrides):
    values = {"landscape": "quadratic", "optimizer": optimizer, "steps": 20, "frequency": 5, "lr_max": 1e-2}
    values.update(overrides)
    result = run(make_run_config(values))
    return records_frame(result.records, optimizer)


def test_telemetry_frame_parses_empty_cells():
    data = telemetry_frame(frame_for("adam"))
    assert data["loss"].dtype == np.float64
    assert data["g_dot_n"].isna().all()


def test_loss_figure_has_one_trace_per_optimizer():
    frame = pd.concat([frame_for("adam"), frame_for("deo-adam")], ignore_index=True)
    fig = loss_figure(frame, log_y=False)
    assert [trace.name for trace in fig.data] == ["adam", "deo-adam"]
    assert len(fig.data[0].x) == 20


def test_curvature_figure_plots_refresh_steps():
    fig = curvature_figure(frame_for("deo-adam"))
    assert len(fig.data) == 3
    assert list(fig.data[0].x) == [5, 10, 15, 20]


def test_spectrum_figure_marks_negative_curvature():
    fig = spectrum_figure([2.0, -1.0, 0.5])
    bar = fig.data[0]
    assert list(bar.y) == [-1.0, 0.5, 2.0]
    assert bar.marker.color[0] != bar.marker.color[1]


def test_alignment_figure_drops_steps_without_oracle():
    fig = alignment_figure(frame_for("deo-adam", oracle=True))
    assert sum(len(trace.x) for trace in fig.data) == 4
