"""
Reusable visualization components using Plotly.
"""

from typing import List, Optional

import numpy as np
import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from config.settings import CHART_CONFIG, THEME_COLORS


def _empty_figure(message: str = "No data available") -> go.Figure:
    return go.Figure().add_annotation(
        text=message,
        showarrow=False,
        font=dict(size=20)
    )


def _apply_layout(fig: go.Figure, title: str, height: Optional[int] = None) -> go.Figure:
    fig.update_layout(
        title=title,
        height=height or CHART_CONFIG['height'],
        margin=CHART_CONFIG['margin'],
        font=dict(family=CHART_CONFIG['font_family']),
        showlegend=True,
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
        paper_bgcolor='rgba(0,0,0,0)',
        plot_bgcolor='rgba(0,0,0,0)'
    )
    return fig


def create_spectrum_chart(
    spectrum: pd.DataFrame,
    summary: pd.DataFrame,
    parameter_label: str,
    pbc_spectrum: Optional[pd.DataFrame] = None,
    critical: Optional[float] = None,
) -> go.Figure:
    """
    Quasienergy spectrum against the sweep parameter.

    Top panel: Re E (OBC, optionally PBC) with P_com on a secondary axis.
    Bottom panel: Im E.

    Args:
        spectrum: DataFrame with param, index, re_E, im_E columns
        summary: DataFrame with param, p_com columns
        parameter_label: Axis title of the sweep parameter
        pbc_spectrum: Optional PBC spectrum in the same layout
        critical: Optional bandwidth-criterion parameter (dashed line)

    Returns:
        Plotly Figure
    """
    if spectrum.empty:
        return _empty_figure()

    fig = make_subplots(
        rows=2, cols=1, shared_xaxes=True, vertical_spacing=0.08,
        specs=[[{"secondary_y": True}], [{"secondary_y": False}]],
    )
    marker = dict(size=CHART_CONFIG['marker_size'])

    if pbc_spectrum is not None and not pbc_spectrum.empty:
        fig.add_trace(go.Scattergl(
            name='Re E (PBC)', x=pbc_spectrum['param'], y=pbc_spectrum['re_E'], mode='markers',
            marker=dict(marker, color=THEME_COLORS['pbc'], opacity=0.4),
        ), row=1, col=1)

    fig.add_trace(go.Scattergl(
        name='Re E (OBC)', x=spectrum['param'], y=spectrum['re_E'], mode='markers',
        marker=dict(marker, color=THEME_COLORS['real']),
    ), row=1, col=1)
    fig.add_trace(go.Scatter(
        name='P_com', x=summary['param'], y=summary['p_com'], mode='lines',
        line=dict(width=2, color=THEME_COLORS['p_com']),
    ), row=1, col=1, secondary_y=True)
    fig.add_trace(go.Scattergl(
        name='Im E', x=spectrum['param'], y=spectrum['im_E'], mode='markers',
        marker=dict(marker, color=THEME_COLORS['imag']),
    ), row=2, col=1)

    if critical is not None:
        fig.add_vline(x=critical, line=dict(dash='dash', color=THEME_COLORS['threshold']))

    fig.update_yaxes(title_text="Re E", row=1, col=1)
    fig.update_yaxes(title_text="P_com", range=[0, 1], row=1, col=1, secondary_y=True)
    fig.update_yaxes(title_text="Im E", row=2, col=1)
    fig.update_xaxes(title_text=parameter_label, row=2, col=1)
    return _apply_layout(fig, "Quasienergy spectrum", height=2 * CHART_CONFIG['height'])


def create_phase_diagram_chart(grid: pd.DataFrame, thresholds: pd.DataFrame, parameter_label: str) -> go.Figure:
    """
    P_com over (parameter, N) with the bisected thresholds overlaid.

    Args:
        grid: DataFrame with param, N, p_com columns
        thresholds: DataFrame with N, threshold columns
    """
    if grid.empty:
        return _empty_figure()

    pivot = grid.pivot(index='N', columns='param', values='p_com')
    fig = go.Figure()
    fig.add_trace(go.Heatmap(
        x=pivot.columns, y=pivot.index, z=pivot.values, colorscale='Viridis',
        colorbar=dict(title='P_com'), name='P_com',
    ))
    if not thresholds.empty:
        fig.add_trace(go.Scatter(
            name='threshold', x=thresholds['threshold'], y=thresholds['N'], mode='markers',
            marker=dict(size=8, color=THEME_COLORS['threshold'], symbol='circle'),
        ))
    fig.update_xaxes(title_text=parameter_label)
    fig.update_yaxes(title_text="N")
    return _apply_layout(fig, "Phase diagram (P_com)")


def create_trajectory_chart(points: pd.DataFrame) -> go.Figure:
    """
    Floquet eigenvalue pair on the complex plane with the unit circle.

    Args:
        points: DataFrame with re_xi1, im_xi1, re_xi2, im_xi2, param columns
    """
    if points.empty:
        return _empty_figure()

    theta = np.linspace(0.0, 2.0 * np.pi, 361)
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        name='|xi| = 1', x=np.cos(theta), y=np.sin(theta), mode='lines',
        line=dict(width=1, color=THEME_COLORS['secondary'], dash='dot'),
    ))
    for label, color in (('1', THEME_COLORS['real']), ('2', THEME_COLORS['imag'])):
        fig.add_trace(go.Scatter(
            name=f'xi{label}', x=points[f're_xi{label}'], y=points[f'im_xi{label}'], mode='lines+markers',
            marker=dict(size=5, color=color), line=dict(width=1, color=color),
            text=points['param'], hovertemplate='param %{text:.4f}<br>%{x:.4f} + %{y:.4f}i<extra></extra>',
        ))
    fig.update_xaxes(title_text="Re xi")
    fig.update_yaxes(title_text="Im xi", scaleanchor='x', scaleratio=1)
    return _apply_layout(fig, "Floquet eigenvalue trajectories")


def create_scale_free_chart(
    scaling: pd.DataFrame,
    positions: pd.DataFrame,
    envelopes: Optional[pd.DataFrame] = None,
) -> go.Figure:
    """
    Finite-size scaling and mean positions in the broken phase.

    Args:
        scaling: DataFrame with inv_N, mean_abs_im columns
        positions: DataFrame with N, n, x_over_N columns
        envelopes: Optional DataFrame with N, state, site, amplitude columns
    """
    if scaling.empty:
        return _empty_figure()

    cols = 3 if envelopes is not None and not envelopes.empty else 2
    fig = make_subplots(rows=1, cols=cols, horizontal_spacing=0.08)
    fig.add_trace(go.Scatter(
        name='mean |Im E|', x=scaling['inv_N'], y=scaling['mean_abs_im'], mode='lines+markers',
        marker=dict(size=8, color=THEME_COLORS['imag']),
    ), row=1, col=1)
    fig.update_xaxes(title_text="1/N", type='log', row=1, col=1)
    fig.update_yaxes(title_text="mean |Im E|", type='log', row=1, col=1)

    for sites, group in positions.groupby('N', sort=True):
        fig.add_trace(go.Scatter(
            name=f'N={sites}', x=group['n'] / len(group), y=group['x_over_N'], mode='markers',
            marker=dict(size=CHART_CONFIG['marker_size'] + 1),
        ), row=1, col=2)
    fig.update_xaxes(title_text="n / (Nm), ascending Im E", row=1, col=2)
    fig.update_yaxes(title_text="<x>_n / N", row=1, col=2)

    if cols == 3:
        for (sites, state), group in envelopes.groupby(['N', 'state'], sort=True):
            fig.add_trace(go.Scatter(
                name=f'N={sites} state {state}', x=group['site'] / sites, y=group['amplitude'], mode='lines',
            ), row=1, col=3)
        fig.update_xaxes(title_text="x / N", row=1, col=3)
        fig.update_yaxes(title_text="|psi(x)|", row=1, col=3)

    return _apply_layout(fig, "Scale-free localization")


def create_perturbation_chart(
    magnitudes: np.ndarray,
    profiles: pd.DataFrame,
    gamma: Optional[pd.DataFrame] = None,
) -> go.Figure:
    """
    Boundary structure of the non-Hermitian correction.

    Args:
        magnitudes: |V_ij| (non-Hermitian part) as a 2D array
        profiles: DataFrame with site, main, secondary columns
        gamma: Optional DataFrame with inv_N, gamma_p columns
    """
    if magnitudes.size == 0:
        return _empty_figure()

    cols = 3 if gamma is not None and not gamma.empty else 2
    fig = make_subplots(rows=1, cols=cols, horizontal_spacing=0.1)
    sites = np.arange(1, magnitudes.shape[0] + 1)
    fig.add_trace(go.Heatmap(
        x=sites, y=sites, z=magnitudes, colorscale='Blues', showscale=False, name='|V_ij|',
    ), row=1, col=1)
    fig.update_yaxes(autorange='reversed', title_text="i", row=1, col=1)
    fig.update_xaxes(title_text="j", row=1, col=1)

    for column, color in (('main', THEME_COLORS['primary']), ('secondary', THEME_COLORS['imag'])):
        fig.add_trace(go.Scatter(
            name=f'|V| {column} diagonal', x=profiles['site'], y=profiles[column], mode='lines',
            line=dict(width=2, color=color),
        ), row=1, col=2)
    fig.update_xaxes(title_text="site", row=1, col=2)
    fig.update_yaxes(title_text="|V|", type='log', row=1, col=2)

    if cols == 3:
        fig.add_trace(go.Scatter(
            name='Gamma_p', x=gamma['inv_N'], y=gamma['gamma_p'], mode='lines+markers',
            marker=dict(size=8, color=THEME_COLORS['p_com']),
        ), row=1, col=3)
        fig.update_xaxes(title_text="1/N", type='log', row=1, col=3)
        fig.update_yaxes(title_text="Gamma_p", type='log', row=1, col=3)

    return _apply_layout(fig, "Non-Hermitian boundary correction")


def create_bandwidth_chart(widths: pd.DataFrame, zone_width: float, parameter_label: str) -> go.Figure:
    """
    PBC bandwidths against the scan parameter with the 2 pi / T zone width.

    Args:
        widths: DataFrame with param, total and band_<b> columns
    """
    if widths.empty:
        return _empty_figure()

    fig = go.Figure()
    band_columns: List[str] = [c for c in widths.columns if c.startswith('band_')]
    for column in band_columns + ['total']:
        fig.add_trace(go.Scatter(name=column, x=widths['param'], y=widths[column], mode='lines'))
    fig.add_hline(y=zone_width, line=dict(dash='dash', color=THEME_COLORS['threshold']))
    fig.update_xaxes(title_text=parameter_label)
    fig.update_yaxes(title_text="bandwidth")
    return _apply_layout(fig, "PBC bandwidth criterion")
