import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

CURVATURE_COLUMNS = {
    "curv_paper": "(L2 - L) / ΔR",
    "curv_grad": "(g2 - g)·N / ΔR",
    "curv_2nd": "second order",
}

NUMERIC_COLUMNS = (
    "step", "lr", "loss", "grad_norm", "g_dot_n", "curv_paper", "curv_grad",
    "curv_2nd", "dimer_refreshed", "grad_evals", "align_vmin",
)


def telemetry_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Numeric view of a run CSV (empty cells become NaN)"""
    out = frame.copy()
    for column in NUMERIC_COLUMNS:
        if column in out.columns:
            out[column] = pd.to_numeric(out[column].replace("", np.nan), errors="coerce")
    return out


def loss_figure(frame: pd.DataFrame, log_y: bool = True) -> go.Figure:
    data = telemetry_frame(frame)
    fig = px.line(
        data,
        x="step",
        y="loss",
        color="optimizer",
        log_y=log_y and bool((data["loss"] > 0).all()),
        title="Loss per step",
    )
    fig.update_layout(xaxis_title="Step", yaxis_title="Loss", legend_title="Optimizer")
    return fig


def curvature_figure(frame: pd.DataFrame) -> go.Figure:
    """Curvature estimates at each dimer refresh"""
    data = telemetry_frame(frame)
    refreshed = data[data["dimer_refreshed"] == 1]
    fig = go.Figure()
    for column, name in CURVATURE_COLUMNS.items():
        fig.add_trace(go.Scatter(x=refreshed["step"], y=refreshed[column], mode="lines+markers", name=name))
    fig.update_layout(title="Curvature along the dimer axis", xaxis_title="Step", yaxis_title="Curvature")
    return fig


def spectrum_figure(eigenvalues) -> go.Figure:
    values = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    colors = ["#d62728" if v < 0 else "#1f77b4" for v in values]
    fig = go.Figure(go.Bar(x=list(range(values.size)), y=values, marker_color=colors))
    fig.update_layout(title="Hessian spectrum", xaxis_title="Index (ascending)", yaxis_title="Eigenvalue",
                      showlegend=False)
    return fig


def alignment_figure(frame: pd.DataFrame) -> go.Figure:
    data = telemetry_frame(frame).dropna(subset=["align_vmin"])
    fig = px.scatter(data, x="step", y="align_vmin", color="optimizer" if "optimizer" in data else None,
                     title="Alignment of the dimer axis with the lowest-curvature eigenvector")
    fig.update_yaxes(range=[0, 1.05])
    fig.update_layout(xaxis_title="Step", yaxis_title="|cos|")
    return fig
