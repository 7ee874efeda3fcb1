/* Built-in read-only viewer for exported explanation bundles.
 * Reads the JSON document embedded under #iema-data and renders one panel
 * per dialogue step plus the grammar's suggested next steps. */
(function () {
  "use strict";

  function el(tag, attrs, children) {
    var node = document.createElement(tag);
    if (attrs) Object.keys(attrs).forEach(function (k) { node.setAttribute(k, attrs[k]); });
    (children || []).forEach(function (c) {
      node.appendChild(typeof c === "string" ? document.createTextNode(c) : c);
    });
    return node;
  }

  function svg(width, height) {
    var s = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    s.setAttribute("viewBox", "0 0 " + width + " " + height);
    s.setAttribute("width", "100%");
    return s;
  }

  function shape(parent, tag, attrs) {
    var node = document.createElementNS("http://www.w3.org/2000/svg", tag);
    Object.keys(attrs).forEach(function (k) { node.setAttribute(k, attrs[k]); });
    parent.appendChild(node);
    return node;
  }

  function scale(domainLo, domainHi, rangeLo, rangeHi) {
    var span = domainHi - domainLo || 1;
    return function (v) { return rangeLo + ((v - domainLo) / span) * (rangeHi - rangeLo); };
  }

  var W = 360, H = 200, PAD = 28;

  function barChart(labels, values, color) {
    var s = svg(W, H);
    var lo = Math.min(0, Math.min.apply(null, values));
    var hi = Math.max(0, Math.max.apply(null, values));
    var y = scale(lo, hi, H - PAD, PAD);
    var bw = (W - 2 * PAD) / Math.max(1, values.length);
    shape(s, "line", { x1: PAD, x2: W - PAD, y1: y(0), y2: y(0), stroke: "#888" });
    values.forEach(function (v, i) {
      var top = Math.min(y(0), y(v));
      shape(s, "rect", {
        x: PAD + i * bw + 2, y: top, width: Math.max(1, bw - 4),
        height: Math.abs(y(v) - y(0)) || 1, fill: color || "#4878b0"
      });
      shape(s, "text", {
        x: PAD + i * bw + bw / 2, y: H - 8, "font-size": 9, "text-anchor": "middle"
      }).textContent = String(labels[i]).slice(0, 9);
    });
    return s;
  }

  function lineChart(xs, ys, anchor) {
    var s = svg(W, H);
    var x = scale(Math.min.apply(null, xs), Math.max.apply(null, xs), PAD, W - PAD);
    var y = scale(Math.min.apply(null, ys), Math.max.apply(null, ys), H - PAD, PAD);
    var dAttr = ys.map(function (v, i) {
      return (i ? "L" : "M") + x(xs[i]).toFixed(1) + " " + y(v).toFixed(1);
    }).join(" ");
    shape(s, "path", { d: dAttr, fill: "none", stroke: "#4878b0", "stroke-width": 2 });
    if (anchor) {
      shape(s, "circle", { cx: x(anchor.x), cy: y(anchor.prediction), r: 4, fill: "#d0544f" });
    }
    return s;
  }

  function scatterChart(pairs, color) {
    var s = svg(W, H);
    var xs = pairs.map(function (p) { return p[0]; });
    var ys = pairs.map(function (p) { return p[1]; });
    var x = scale(Math.min.apply(null, xs), Math.max.apply(null, xs), PAD, W - PAD);
    var y = scale(Math.min.apply(null, ys), Math.max.apply(null, ys), H - PAD, PAD);
    pairs.forEach(function (p) {
      shape(s, "circle", { cx: x(p[0]), cy: y(p[1]), r: 2.5, fill: color || "#4878b0", "fill-opacity": 0.6 });
    });
    return s;
  }

  function heatmap(variables, values) {
    var s = svg(W, W);
    var cell = (W - 2 * PAD) / variables.length;
    values.forEach(function (row, i) {
      row.forEach(function (v, j) {
        var t = v === null ? 0 : Math.max(-1, Math.min(1, v));
        var red = t < 0 ? 208 : Math.round(255 - 183 * t);
        var blue = t > 0 ? 208 : Math.round(255 + 175 * t);
        var green = Math.round(255 - 140 * Math.abs(t));
        shape(s, "rect", {
          x: PAD + j * cell, y: PAD + i * cell, width: cell - 1, height: cell - 1,
          fill: v === null ? "#eee" : "rgb(" + red + "," + green + "," + blue + ")"
        });
      });
      shape(s, "text", { x: 4, y: PAD + i * cell + cell / 2, "font-size": 9 })
        .textContent = variables[i].slice(0, 8);
    });
    return s;
  }

  function networkChart(nodes, edges) {
    var s = svg(W, H);
    var cx = W / 2, cy = H / 2, r = Math.min(W, H) / 2 - PAD;
    var pos = {};
    nodes.forEach(function (n, i) {
      var a = (2 * Math.PI * i) / nodes.length;
      pos[n] = [cx + r * Math.cos(a), cy + r * Math.sin(a)];
    });
    edges.forEach(function (e) {
      shape(s, "line", {
        x1: pos[e.a][0], y1: pos[e.a][1], x2: pos[e.b][0], y2: pos[e.b][1],
        stroke: e.weight < 0 ? "#d0544f" : "#4878b0",
        "stroke-width": 1 + 2 * Math.abs(e.weight)
      });
    });
    nodes.forEach(function (n) {
      shape(s, "circle", { cx: pos[n][0], cy: pos[n][1], r: 5, fill: "#333" });
      shape(s, "text", { x: pos[n][0] + 7, y: pos[n][1] + 3, "font-size": 9 }).textContent = n;
    });
    return s;
  }

  function panelBody(symbol, payload) {
    if (symbol === "Select_Variable") {
      return el("p", { class: "note" }, ["Variable in focus: " + payload.selected]);
    }
    if (payload.contributions) {
      return barChart(
        payload.contributions.map(function (c) { return c.variable; }),
        payload.contributions.map(function (c) { return c.value; })
      );
    }
    if (payload.entries) {
      return barChart(
        payload.entries.map(function (e) { return e.variable; }),
        payload.entries.map(function (e) { return e.estimate; }),
        "#6a9e58"
      );
    }
    if (payload.points && payload.method !== "shap_dependence") {
      var pts = payload.points.map(function (p) {
        return [p.x !== undefined ? p.x : p.level, p.mean];
      });
      var body = el("div", null, []);
      if (payload.scatter && typeof pts[0][0] === "number") {
        body.appendChild(scatterChart(payload.scatter.map(function (p) { return [p.x, p.y]; }), "#bbb"));
      }
      body.appendChild(typeof pts[0][0] === "number"
        ? lineChart(pts.map(function (p) { return p[0]; }), pts.map(function (p) { return p[1]; }))
        : barChart(pts.map(function (p) { return p[0]; }), pts.map(function (p) { return p[1]; })));
      return body;
    }
    if (payload.method === "shap_dependence") {
      return scatterChart(payload.points.map(function (p) { return [p.x, p.phi]; }));
    }
    if (payload.grid && payload.values) {
      if (typeof payload.grid[0] === "number") {
        return lineChart(payload.grid, payload.values, payload.anchor || null);
      }
      return barChart(payload.grid, payload.values);
    }
    if (payload.bins) {
      if (payload.bins.length && payload.bins[0].level !== undefined) {
        return barChart(
          payload.bins.map(function (b) { return b.level; }),
          payload.bins.map(function (b) { return b.count; })
        );
      }
      if (payload.bins.length) {
        return barChart(
          payload.bins.map(function (b) { return b.lo.toFixed(1); }),
          payload.bins.map(function (b) { return b.count; })
        );
      }
      var st = payload.stats || {};
      return el("p", { class: "note" },
        ["median " + st.median + ", quartiles [" + st.q1 + ", " + st.q3 + "]"]);
    }
    if (payload.variables && payload.values) {
      return heatmap(payload.variables, payload.values);
    }
    if (payload.nodes && payload.edges) {
      return networkChart(payload.nodes, payload.edges);
    }
    if (payload.counts) {
      return barChart(payload.levels_a, payload.row_marginals);
    }
    return el("pre", null, [JSON.stringify(payload, null, 2).slice(0, 600)]);
  }

  function render() {
    var holder = document.getElementById("iema-data");
    var app = document.getElementById("app");
    if (!holder || !app) return;
    var bundle = JSON.parse(holder.textContent);

    app.appendChild(el("header", null, [
      el("h1", null, ["Explanation dialogue: " + bundle.dataset.name]),
      el("p", { class: "note" }, [
        "model " + bundle.model.id + " (" + bundle.model.task + "), " +
        bundle.dataset.n_rows + " rows, seed " + bundle.seed
      ])
    ]));

    var grid = el("div", { class: "grid" }, []);
    bundle.history.forEach(function (step, i) {
      grid.appendChild(el("section", { class: "panel" }, [
        el("h2", null, [(i + 1) + ". " + step.symbol]),
        panelBody(step.symbol, step.payload)
      ]));
    });
    app.appendChild(grid);

    var ns = bundle.next_steps;
    app.appendChild(el("footer", null, [
      el("h2", null, ["Suggested next steps"]),
      el("ul", { class: "suggestions" }, ns.permitted.map(function (t) {
        return el("li", null, [t]);
      })),
      el("p", { class: "note" },
        [ns.end_of_dialogue ? "The dialogue may also stop here." : "The dialogue is not complete yet."])
    ]));
  }

  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", render);
  } else {
    render();
  }
})();
