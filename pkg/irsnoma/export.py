from openpyxl import Workbook
from openpyxl.styles import Font

from irsnoma.models import COLUMNS

XLSX_CONTENT_TYPE = 'application/vnd.openxmlformats-officedocument.spreadsheetml.sheet'

SUMMARY_HEADERS = ['Run', 'Created', 'Kind', 'Scenario', 'Seed', 'Trials', 'Rows', 'Output', 'Notes', 'Fits']


def _write_header(ws, headers):
    for col, header in enumerate(headers, 1):
        cell = ws.cell(row=1, column=col, value=header)
        cell.font = Font(bold=True)


def _fit_columns(ws):
    for col in ws.columns:
        max_length = 0
        column = col[0].column_letter
        for cell in col:
            if cell.value is not None:
                max_length = max(max_length, len(str(cell.value)))
        ws.column_dimensions[column].width = min(max_length + 2, 50)


def build_workbook(runs):
    """One summary sheet plus one sheet per run holding its CSV rows."""
    wb = Workbook()
    summary = wb.active
    summary.title = 'Runs'
    _write_header(summary, SUMMARY_HEADERS)

    for row, run in enumerate(runs, 2):
        sheet_title = f'{row - 1} {run.kind}'[:31]
        summary.cell(row=row, column=1, value=sheet_title)
        summary.cell(row=row, column=2, value=run.created.strftime('%Y-%m-%d %H:%M'))
        summary.cell(row=row, column=3, value=run.get_kind_display())
        summary.cell(row=row, column=4, value=run.get_scenario_display())
        summary.cell(row=row, column=5, value=run.seed)
        summary.cell(row=row, column=6, value=run.trials)
        summary.cell(row=row, column=7, value=run.rows_written)
        summary.cell(row=row, column=8, value=run.output_path)
        summary.cell(row=row, column=9, value=run.notes)
        summary.cell(row=row, column=10, value=run.fits)

        ws = wb.create_sheet(sheet_title)
        _write_header(ws, COLUMNS)
        for result_row, result in enumerate(run.results.all(), 2):
            for col, value in enumerate(result.values(), 1):
                ws.cell(row=result_row, column=col, value=value)
        _fit_columns(ws)

    _fit_columns(summary)
    return wb
