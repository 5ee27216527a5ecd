// Insights page: what drives your mood (feature importances) and who
// drives it (friend influencers, signed, with an |r| bar). Both lists
// keep the server's order untouched; ranking is the server's job.

import type { Insights } from "../types.js";

export interface InsightsView {
  root: HTMLElement;
  update(payload: Insights): void;
}

export function renderInsights(container: HTMLElement): InsightsView {
  const root = document.createElement("section");
  root.className = "insights-panel";

  const heading = document.createElement("h2");
  heading.textContent = "Insights";
  root.appendChild(heading);

  const scopeNote = document.createElement("p");
  scopeNote.className = "scope-note";
  root.appendChild(scopeNote);

  const featuresTitle = document.createElement("h3");
  featuresTitle.textContent = "Top predictors";
  root.appendChild(featuresTitle);

  const featureList = document.createElement("ol");
  featureList.className = "feature-ranking";
  root.appendChild(featureList);

  const featureReason = document.createElement("p");
  featureReason.className = "empty-state";
  root.appendChild(featureReason);

  const influencersTitle = document.createElement("h3");
  influencersTitle.textContent = "People who move your mood";
  root.appendChild(influencersTitle);

  const influencerList = document.createElement("ul");
  influencerList.className = "influencer-ranking";
  root.appendChild(influencerList);

  const influencerReason = document.createElement("p");
  influencerReason.className = "empty-state";
  root.appendChild(influencerReason);

  container.appendChild(root);

  return {
    root,
    update(payload) {
      featureList.textContent = "";
      influencerList.textContent = "";

      scopeNote.hidden = !payload.importance.fallback;
      scopeNote.textContent = payload.importance.fallback
        ? payload.importance.reason ?? ""
        : "";

      const features = payload.importance.by_decrease;
      featureReason.hidden = features.length > 0;
      if (features.length === 0) {
        featureReason.textContent = payload.importance.reason ?? "no model yet";
      }
      for (const item of features) {
        const li = document.createElement("li");
        li.dataset.feature = item.feature;
        const name = document.createElement("span");
        name.className = "feature-name";
        name.textContent = item.feature;
        const value = document.createElement("span");
        value.className = "feature-value";
        value.textContent = item.value.toExponential(3);
        li.appendChild(name);
        li.appendChild(value);
        featureList.appendChild(li);
      }

      const influencers = payload.influencers.items;
      influencerReason.hidden = influencers.length > 0;
      if (influencers.length === 0) {
        influencerReason.textContent =
          payload.influencers.reason ?? "no influence data yet";
      }
      for (const item of influencers) {
        const li = document.createElement("li");
        li.dataset.friend = item.friend;
        li.dataset.direction = item.direction;

        const sign = document.createElement("span");
        sign.className = `influence-sign ${item.direction}`;
        sign.textContent = item.direction === "positive" ? "+" : "-";
        li.appendChild(sign);

        const name = document.createElement("span");
        name.className = "influencer-name";
        name.textContent = item.friend;
        li.appendChild(name);

        const bar = document.createElement("span");
        bar.className = "influence-bar";
        bar.style.width = `${Math.round(Math.abs(item.r) * 100)}%`;
        bar.title = `r = ${item.r.toFixed(3)} over ${item.n_events} events`;
        li.appendChild(bar);

        influencerList.appendChild(li);
      }
    },
  };
}
