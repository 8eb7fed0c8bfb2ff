from .questionnaire import (KENNEDY_WEIGHTS, SSQ_ITEMS, SSQ_MEASURES, QuestionnaireResponse, SSQScores,
                            score_ieq, score_ssq)
from .stats import (DegenerateTestError, Descriptives, TestResult, describe, paired_t, shapiro_wilk,
                    signed_rank_counts, spearman, wilcoxon_signed_rank)
from .study import (StudyFormatError, StudyReport, StudyTable, analyze_study, load_performance,
                    load_questionnaires, load_study, select_test)
from .report import format_report, format_test, write_report
