import init, { fixtures, solve, check, refine } from "./pkg/stopgame_demo.js";

const $ = (id) => document.getElementById(id);

const EXAMPLE = `{
  "grid": [0, "1/2", 1],
  "nodes": [
    {"id": 0, "depth": 0},
    {"id": 1, "depth": 1, "parent": 0, "p": "1"},
    {"id": 2, "depth": 2, "parent": 1, "p": "1"}
  ],
  "payoff": {"kind": "abs_diff_f", "f": [0, 0, 1]}
}`;

function source() {
  const text = $("doc").value.trim();
  return text.length > 0 ? text : $("fixture").value;
}

function table(headers, rows) {
  const head = "<tr>" + headers.map((h) => `<th>${h}</th>`).join("") + "</tr>";
  const body = rows.map((r) => "<tr>" + r.map((c) => `<td>${c ?? ""}</td>`).join("") + "</tr>").join("");
  return `<table>${head}${body}</table>`;
}

function status(pass) {
  return pass ? '<span class="pass">PASS</span>' : '<span class="fail">FAIL</span>';
}

function showSolve(r) {
  const fam = r.families;
  const nodes = fam.V1.map((_, n) => [n, r.diagonal[n], fam.V1[n], fam["V1+"][n], fam.V2[n], fam["V2+"][n]]);
  const games = r.dynkin.map((g) => [
    `${g.lower} / ${g.upper} / ${g.tie}`,
    g.ordered ? "yes" : "no",
    g.closed_loop.root_value ?? g.closed_loop.error,
    g.jj ? (g.jj.value ?? g.jj.error) : "",
  ]);
  const open = Array.isArray(r.open_loop)
    ? table(["game", "value", "optimizer"], r.open_loop.map((d) => [d.name, d.value, d.optimizer]))
    : `<p>${r.open_loop.error}</p>`;
  return `<h2>Value families</h2>
    <p>${r.nodes} nodes, ${r.leaves} leaves, ${r.stopping_times} stopping times, payoff ${r.payoff.kind}</p>
    ${table(["node", "U(n,n)", "V1", "V1+", "V2", "V2+"], nodes)}
    <h2>Closed loop</h2>${table(["lower / upper / tie", "ordered", "value", "J - J'"], games)}
    <h2>Open loop</h2>${open}`;
}

function showCheck(r) {
  const g = r.sandwich.game_values;
  const values = table(
    ["A upper", "A lower", "B upper", "B lower", "Type I maps", "Type II maps"],
    [[g.A_upper, g.A_lower, g.B_upper, g.B_lower, g.maps.type_i, g.maps.type_ii]],
  );
  const checks = table(["check", "status", "detail"], r.checks.map((c) => [c.id, status(c.status === "PASS"), c.detail]));
  return `<h2>Game values over all non-anticipative maps</h2>${values}
    <h2>Checks ${status(r.all_pass)}</h2>${checks}`;
}

function showRefine(r) {
  const rows = r.rows.map((row) => [
    row.steps,
    row.delta,
    row.game_values ? row.game_values.A_upper : "not enumerated",
    row.dvalue_spread,
    row.spread,
    row.spread_kind,
  ]);
  return `<h2>Spread against step size</h2>
    ${table(["N", "step", "A upper", "open-loop spread", "spread", "kind"], rows)}`;
}

function run(op, render) {
  $("error").textContent = "";
  $("output").innerHTML = "<p>working...</p>";
  setTimeout(() => {
    try {
      $("output").innerHTML = render(JSON.parse(op()));
    } catch (e) {
      $("output").innerHTML = "";
      $("error").textContent = e.message ?? String(e);
    }
  }, 0);
}

await init();

for (const name of JSON.parse(fixtures())) {
  $("fixture").add(new Option(name, name));
}
$("doc").placeholder = EXAMPLE;

$("solve").onclick = () => run(() => solve(source(), $("mode").value, Number($("seed").value)), showSolve);
$("check").onclick = () => run(() => check(source(), $("mode").value, Number($("seed").value)), showCheck);
$("refine").onclick = () => run(() => refine(Number($("levels").value)), showRefine);
