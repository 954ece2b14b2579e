"""
Excel Exporter
Export the scorecard results to a formatted Excel workbook
"""

from pathlib import Path
from typing import Dict, Optional

import pandas as pd
from loguru import logger

MAX_COLUMN_WIDTH = 50
SHEET_ORDER = ("Evaluation", "Coefficients", "Clusters", "Manifest")


class ExcelExporter:
    """
    Export pipeline tables to Excel with auto-sized columns
    """

    def __init__(self):
        """Initialize Excel exporter"""
        self.engine = "openpyxl"

    def _autosize(self, worksheet) -> None:
        for column in worksheet.columns:
            width = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            worksheet.column_dimensions[column[0].column_letter].width = min(width + 2, MAX_COLUMN_WIDTH)

    def export_workbook(
        self, sheets: Dict[str, pd.DataFrame], file_path: Path
    ) -> tuple[bool, Optional[Path], Optional[str]]:
        """
        Write one sheet per table

        A failed export is reported but never aborts the run.

        Args:
            sheets: Sheet name -> DataFrame (Evaluation, Coefficients, Clusters, Manifest)
            file_path: Destination .xlsx

        Returns:
            Tuple of (success, path, error_message)
        """
        path = Path(file_path)
        try:
            logger.info(f"📊 Exporting workbook: {path.name}")
            path.parent.mkdir(parents=True, exist_ok=True)
            ordered = [name for name in SHEET_ORDER if name in sheets] + [n for n in sheets if n not in SHEET_ORDER]

            with pd.ExcelWriter(path, engine=self.engine) as writer:
                for sheet_name in ordered:
                    safe_name = sheet_name[:31]
                    sheets[sheet_name].to_excel(writer, sheet_name=safe_name, index=False)
                    self._autosize(writer.sheets[safe_name])

            logger.info(f"✅ Workbook exported with {len(ordered)} sheets")
            return True, path, None

        except Exception as e:
            logger.error(f"❌ Error exporting workbook: {e}")
            return False, None, str(e)


# Global instance
excel_exporter = ExcelExporter()
