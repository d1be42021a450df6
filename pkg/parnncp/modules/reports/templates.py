"""Text report templates printed by the CLI.

Templates are jinja2 strings rendered by render.py; keep them plain text
(no ANSI) so output can be piped and diffed.
"""

# ============================================================================
# RUN SUMMARY (after `parnncp run`, one block per rank)
# ============================================================================

RUN_SUMMARY_TEXT = """\
input      {{ input }}
rank       {{ rank }}
nls        {{ nls }}
grid       {{ grid }}
dimtree    {{ "on" if dimtree else "off" }}
iterations {{ iterations }}
final eps  {{ "%.6e"|format(final_eps) }}
phase totals (s):
{%- for name, seconds in phases.items() %}
  {{ "%-12s"|format(name) }} {{ "%.6f"|format(seconds) }}
{%- endfor %}
{%- if words is not none %}
comm words/iter (worker 0): {{ "%.1f"|format(words) }}
{%- endif %}
{%- if artifacts %}
artifacts:
{%- for label, path in artifacts %}
  {{ "%-6s"|format(label) }} {{ path }}
{%- endfor %}
{%- endif %}
"""

# ============================================================================
# GRID TABLE (after `parnncp grid`)
# ============================================================================

GRID_TABLE_TEXT = """\
dims {{ dims|join("x") }}, P={{ procs }}, R={{ rank }}
{{ "%-20s"|format("grid") }} {{ "%16s"|format("sum I_n/P_n") }} {{ "%16s"|format("words/iter") }}
{%- for choice in choices %}
{{ "%-20s"|format(choice.label) }} {{ "%16.3f"|format(choice.objective) }} {{ "%16.1f"|format(choice.comm_words) }}{{ "  <- optimal" if choice.optimal else "" }}
{%- endfor %}
"""

COST_TABLE_TEXT = """\
leading-order costs on {{ grid }}:
{{ "%-14s"|format("") }} {{ "%16s"|format("flops") }} {{ "%16s"|format("comm words") }} {{ "%16s"|format("mttkrp temp") }} {{ "%16s"|format("replicas") }}
{%- for label, est in estimates %}
{{ "%-14s"|format(label) }} {{ "%16.4g"|format(est.computation_flops) }} {{ "%16.4g"|format(est.communication_words) }} {{ "%16.4g"|format(est.memory_mttkrp_words) }} {{ "%16.4g"|format(est.memory_replica_words) }}
{%- endfor %}
"""
