// The ten-question intake form shown before the first level. Submission is
// blocked until every question has an answer.

import type { QuestionnaireAnswers } from "./types";

export const FREQUENCY_QUESTION = "How often do you play video games?";
export const FREQUENCY_CHOICES = [
  "Never",
  "Once or twice a month",
  "Once a week",
  "A few times a week",
  "Every day",
];

// Statements 2-10; three probe rushing, three treasure hunting, three combat.
export const PERSONA_QUESTIONS = [
  "I rush to the exit as quickly as I can.",
  "I comb each area for hidden loot before moving on.",
  "I go out of my way to defeat every enemy I spot.",
  "Fighting enemies is the part I enjoy most.",
  "Hunting for treasure is the part I enjoy most.",
  "Reaching the goal is all I really care about.",
  "I pick up every collectible I can reach.",
  "I try to waste as few moves as possible.",
  "I like testing myself against many kinds of enemies.",
];

export const ANSWER_CHOICES = ["Never", "Rarely", "Sometimes", "Often", "Always"];

export function buildQuestionnaire(
  root: HTMLElement,
  onSubmit: (answers: QuestionnaireAnswers) => void,
): HTMLFormElement {
  const form = document.createElement("form");
  form.className = "questionnaire";
  form.noValidate = true;

  const heading = document.createElement("h2");
  heading.textContent = "Before you play";
  form.appendChild(heading);

  form.appendChild(questionBlock("q1", FREQUENCY_QUESTION, FREQUENCY_CHOICES));
  PERSONA_QUESTIONS.forEach((text, i) => {
    form.appendChild(questionBlock(`q${i + 2}`, `${i + 2}. ${text}`, ANSWER_CHOICES));
  });

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Save answers and start playing";
  submit.disabled = true;
  form.appendChild(submit);

  const refresh = () => {
    submit.disabled = readAnswers(form) === null;
  };
  form.addEventListener("change", refresh);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const answers = readAnswers(form);
    if (answers) {
      onSubmit(answers);
    }
  });

  root.appendChild(form);
  return form;
}

function questionBlock(name: string, text: string, choices: string[]): HTMLElement {
  const block = document.createElement("fieldset");
  block.className = "question";
  const legend = document.createElement("legend");
  legend.textContent = text;
  block.appendChild(legend);
  choices.forEach((choice, value) => {
    const label = document.createElement("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = name;
    radio.value = String(value);
    label.append(radio, ` ${choice}`);
    block.appendChild(label);
  });
  return block;
}

export function readAnswers(form: HTMLFormElement): QuestionnaireAnswers | null {
  const data = new FormData(form);
  const values: number[] = [];
  for (let q = 1; q <= 10; q++) {
    const raw = data.get(`q${q}`);
    if (raw === null) {
      return null;
    }
    values.push(Number(raw));
  }
  return { playFrequency: values[0], answers: values.slice(1) };
}
