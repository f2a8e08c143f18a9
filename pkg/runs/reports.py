"""
PDF summary of a run: configuration, metrics and the ISAR image.
"""
from io import BytesIO

import numpy as np
from PIL import Image as PilImage
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Image, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

METRIC_LABELS = [
    ('delay_set_f1', 'Delay set F1', '{:.4f}'),
    ('doppler_rmse_hz', 'Doppler RMSE (Hz)', '{:.4f}'),
    ('v_hat_mps', 'Estimated speed (m/s)', '{:.3f}'),
    ('v_err_pct', 'Speed error (%)', '{:.2f}'),
    ('image_peak_match_count', 'Image peak matches', '{}'),
]

CONFIG_ROWS = [
    ('seed', 'Seed'),
    ('carrier_hz', 'Carrier (Hz)'),
    ('bandwidth_hz', 'Bandwidth (Hz)'),
    ('cpi_s', 'CPI (s)'),
    ('tx_power_dbm', 'Transmit power (dBm)'),
    ('speed_mps', 'Vehicle speed (m/s)'),
    ('i_gap', 'Frame gap'),
    ('threshold_rule', 'Threshold rule'),
    ('wrap_strategy', 'Wrap strategy'),
    ('cross_range_mode', 'Cross-range mode'),
    ('noiseless', 'Noiseless'),
]


def _format_metric(value, template):
    if value is None:
        return 'n/a'
    return template.format(value)


def image_png(grid):
    """8-bit grayscale PNG of an image grid, scaled by its maximum."""
    grid = np.asarray(grid, dtype=float)
    peak = grid.max() if grid.size else 0.0
    scaled = np.zeros(grid.shape, dtype=np.uint8) if peak <= 0 else np.rint(grid / peak * 255).astype(np.uint8)
    buffer = BytesIO()
    PilImage.fromarray(scaled, mode='L').save(buffer, format='PNG')
    buffer.seek(0)
    return buffer


def _table(rows, shade):
    table = Table(rows, colWidths=[2.5 * inch, 3 * inch])
    table.setStyle(TableStyle([
        ('BACKGROUND', (0, 0), (0, -1), shade),
        ('TEXTCOLOR', (0, 0), (-1, -1), colors.black),
        ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
        ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
        ('FONTNAME', (1, 0), (1, -1), 'Helvetica'),
        ('FONTSIZE', (0, 0), (-1, -1), 10),
        ('GRID', (0, 0), (-1, -1), 1, colors.black),
    ]))
    return table


def build_run_report(manifest, image=None):
    """
    Render the report from a manifest payload. ``invariant`` keeps
    reportlab from stamping dates and ids, so equal runs give equal bytes.
    """
    buffer = BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=A4, rightMargin=30, leftMargin=30,
                            topMargin=30, bottomMargin=30, invariant=1,
                            title='ISAR run report')

    elements = []
    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'CustomTitle',
        parent=styles['Heading1'],
        fontSize=18,
        spaceAfter=30,
        alignment=1,
        textColor=colors.darkblue
    )
    heading_style = ParagraphStyle(
        'CustomHeading',
        parent=styles['Heading2'],
        fontSize=14,
        spaceAfter=12,
        textColor=colors.darkblue
    )

    elements.append(Paragraph("ISAR RUN REPORT", title_style))
    elements.append(Spacer(1, 20))

    config = manifest.get('config', {})
    elements.append(Paragraph("CONFIGURATION", heading_style))
    rows = [[label, str(config[key])] for key, label in CONFIG_ROWS if key in config]
    elements.append(_table(rows, colors.lightgrey))
    elements.append(Spacer(1, 20))

    metrics = manifest.get('metrics', {})
    elements.append(Paragraph("METRICS", heading_style))
    rows = [[label, _format_metric(metrics.get(key), template)] for key, label, template in METRIC_LABELS]
    elements.append(_table(rows, colors.lightblue))
    elements.append(Spacer(1, 20))

    paths = manifest.get('paths', {})
    if paths:
        elements.append(Paragraph("ARTIFACTS", heading_style))
        elements.append(_table([[name, filename] for name, filename in paths.items()], colors.lightgrey))
        elements.append(Spacer(1, 20))

    if image is not None:
        elements.append(Paragraph("ISAR IMAGE", heading_style))
        caption = (f"{image.n_r} range bins x {image.n_cr} cross-range bins, "
                   f"delta_r = {image.delta_r:.4f} m, delta_cr = {image.delta_cr:.4f} m"
                   + (", flipped" if image.flipped else ""))
        elements.append(Paragraph(caption, styles['Normal']))
        elements.append(Spacer(1, 10))
        elements.append(Image(image_png(image.grid), width=6.5 * inch, height=3 * inch))

    doc.build(elements)
    pdf = buffer.getvalue()
    buffer.close()
    return pdf
